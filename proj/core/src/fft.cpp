#include "eci/fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <map>
#include <memory>
#include <mutex>

#include "eci/field.hpp"

namespace eci {

int next_fft_size(int m) {
  if (m < 2) return 2;
  // quantise to multiples of 32 above 128 so de-aliasing grids (whose minimum
  // size tracks measured bandwidths) collapse onto a few plan sizes
  if (m > 128) m = ((m + 31) / 32) * 32;
  for (int n = m + (m % 2);; n += 2) {
    int r = n;
    for (int p : {2, 3, 5, 7})
      while (r % p == 0) r /= p;
    if (r == 1) return n;
  }
}

namespace {

// One cached plan pair per grid size. Plans own their buffers; callers copy
// in and out, so a single scratch pair serves every field of that size.
struct PlanSet {
  int n = 0;
  double* real = nullptr;
  fftw_complex* cplx = nullptr;
  fftw_plan fwd = nullptr;
  fftw_plan bwd = nullptr;

  explicit PlanSet(int n_) : n(n_) {
    const std::size_t nr = std::size_t(n) * n * n;
    const std::size_t nc = std::size_t(n) * n * (n / 2 + 1);
    real = fftw_alloc_real(nr);
    cplx = fftw_alloc_complex(nc);
    // FFTW row-major dims (n0,n1,n2) = (z,y,x): x is the fastest index.
    fwd = fftw_plan_dft_r2c_3d(n, n, n, real, cplx, FFTW_ESTIMATE);
    bwd = fftw_plan_dft_c2r_3d(n, n, n, cplx, real, FFTW_ESTIMATE);
  }
  ~PlanSet() {
    fftw_destroy_plan(fwd);
    fftw_destroy_plan(bwd);
    fftw_free(real);
    fftw_free(cplx);
  }
};

std::map<int, std::unique_ptr<PlanSet>> g_plans;
std::mutex g_plans_mutex;

PlanSet& plans_for(int n) {
  std::lock_guard<std::mutex> lock(g_plans_mutex);
  auto found = g_plans.find(n);
  if (found != g_plans.end() && found->second) return *found->second;
  // cap the scratch held by large cached plans (small grids are cheap)
  int big = 0;
  for (const auto& e : g_plans)
    if (e.first > 128 && e.second) ++big;
  if (big >= 2)
    for (auto it = g_plans.begin(); it != g_plans.end();)
      it = (it->first > 128 && it->first != n) ? g_plans.erase(it) : std::next(it);
  auto& p = g_plans[n];
  p = std::make_unique<PlanSet>(n);
  return *p;
}

}  // namespace

Spectrum fft_forward(const PeriodicField& f) {
  const int n = f.grid().n;
  PlanSet& ps = plans_for(n);
  Spectrum out(f.grid(), f.ncomp());
  const std::size_t nr = f.nodes();
  const std::size_t nc = out.comp_size();
  const double scale = 1.0 / double(nr);
  for (int c = 0; c < f.ncomp(); ++c) {
    std::memcpy(ps.real, f.comp(c), nr * sizeof(double));
    fftw_execute(ps.fwd);
    auto* dst = out.comp(c);
    for (std::size_t i = 0; i < nc; ++i)
      dst[i] = std::complex<double>(ps.cplx[i][0] * scale, ps.cplx[i][1] * scale);
  }
  return out;
}

void fft_inverse(const Spectrum& s, PeriodicField& out) {
  const int n = s.grid().n;
  if (out.grid() != s.grid() || out.ncomp() != s.ncomp())
    throw InvalidInput("fft_inverse: shape mismatch");
  PlanSet& ps = plans_for(n);
  const std::size_t nr = out.nodes();
  const std::size_t nc = s.comp_size();
  for (int c = 0; c < s.ncomp(); ++c) {
    const auto* src = s.comp(c);
    for (std::size_t i = 0; i < nc; ++i) {
      ps.cplx[i][0] = src[i].real();
      ps.cplx[i][1] = src[i].imag();
    }
    fftw_execute(ps.bwd);
    std::memcpy(out.comp(c), ps.real, nr * sizeof(double));
  }
}

Spectrum resample(const Spectrum& s, Grid3 to) {
  const int ns = s.grid().n, nd = to.n;
  if (ns == nd) return s;
  Spectrum out(to, s.ncomp());
  const int half = std::min(ns, nd) / 2;  // modes |k| < half are copied
  for (int c = 0; c < s.ncomp(); ++c) {
    const auto* src = s.comp(c);
    auto* dst = out.comp(c);
    for (int kz = -(half - 1); kz <= half - 1; ++kz) {
      const int szi = kz >= 0 ? kz : kz + ns;
      const int dzi = kz >= 0 ? kz : kz + nd;
      for (int ky = -(half - 1); ky <= half - 1; ++ky) {
        const int syi = ky >= 0 ? ky : ky + ns;
        const int dyi = ky >= 0 ? ky : ky + nd;
        const std::size_t so = s.index(0, syi, szi);
        const std::size_t dofs = out.index(0, dyi, dzi);
        for (int kx = 0; kx <= half - 1; ++kx) dst[dofs + kx] = src[so + kx];
      }
    }
  }
  return out;
}

void derivative_inplace(Spectrum& s, int axis) {
  const int n = s.grid().n;
  const int nyq = n / 2;
  const int nxh = s.nx_half();
  for (int c = 0; c < s.ncomp(); ++c) {
    auto* d = s.comp(c);
    for (int kzi = 0; kzi < n; ++kzi) {
      const int kz = s.freq_of(kzi);
      for (int kyi = 0; kyi < n; ++kyi) {
        const int ky = s.freq_of(kyi);
        std::size_t o = s.index(0, kyi, kzi);
        for (int kxi = 0; kxi < nxh; ++kxi) {
          const int k = axis == 0 ? kxi : (axis == 1 ? ky : kz);
          double m = (std::abs(k) == nyq) ? 0.0 : double(k);
          const std::complex<double> z = d[o + kxi];
          d[o + kxi] = std::complex<double>(-m * z.imag(), m * z.real());
        }
      }
    }
  }
}

int Spectrum::effective_band(double tol) const {
  double maxmag = 0.0;
  for (const auto& z : data_) maxmag = std::max(maxmag, std::norm(z));
  if (maxmag == 0.0) return 0;
  const double thr = maxmag * tol * tol;
  int band = 0;
  for (int c = 0; c < ncomp_; ++c) {
    const auto* d = comp(c);
    for (int kzi = 0; kzi < grid_.n; ++kzi) {
      const int kz = std::abs(freq_of(kzi));
      for (int kyi = 0; kyi < grid_.n; ++kyi) {
        const int ky = std::abs(freq_of(kyi));
        const std::size_t o = index(0, kyi, kzi);
        for (int kxi = 0; kxi < nx_half(); ++kxi) {
          if (std::norm(d[o + kxi]) > thr) {
            const int b = std::max(kxi, std::max(ky, kz));
            if (b > band) band = b;
          }
        }
      }
    }
  }
  return band;
}

}  // namespace eci
