#include "eci/mollifier.hpp"

#include <cmath>

#include "eci/fft.hpp"

namespace eci {

namespace {

double bump(double u) {
  const double s = 1.0 - u * u;
  return s > 0.0 ? std::exp(-1.0 / s) : 0.0;
}

// Composite trapezoid on [-1,1]; the bump vanishes to all orders at the
// endpoints, so the rule converges spectrally.
constexpr int kQuadPoints = 4096;

double bump_cos_integral(double theta) {
  const double h = 2.0 / kQuadPoints;
  double sum = 0.0;
  for (int i = 1; i < kQuadPoints; ++i) {
    const double u = -1.0 + i * h;
    sum += bump(u) * std::cos(theta * u);
  }
  return sum * h;
}

}  // namespace

Mollifier::Mollifier(double ell) : ell_(ell) {
  if (!(ell > 0.0)) throw InvalidInput("Mollifier: ell must be positive");
  inv_mass_ = 1.0 / bump_cos_integral(0.0);
}

double Mollifier::psi_hat_1d(double xi) const {
  const double theta = xi * ell_;
  const long long key = llround(theta * 1e12);
  auto it = cache_.find(key);
  if (it != cache_.end()) return it->second;
  const double v = bump_cos_integral(theta) * inv_mass_;
  cache_[key] = v;
  return v;
}

double Mollifier::multiplier(int kx, int ky, int kz) const {
  return psi_hat_1d(kx) * psi_hat_1d(ky) * psi_hat_1d(kz);
}

PeriodicField Mollifier::apply(const PeriodicField& f) const {
  Spectrum s = fft_forward(f);
  const int n = f.grid().n;
  // 1-D multiplier table
  std::vector<double> m1(std::size_t(n / 2) + 1);
  for (int k = 0; k <= n / 2; ++k) m1[std::size_t(k)] = psi_hat_1d(double(k));
  for (int c = 0; c < s.ncomp(); ++c) {
    auto* d = s.comp(c);
    for (int kzi = 0; kzi < n; ++kzi) {
      const int kz = std::abs(s.freq_of(kzi));
      for (int kyi = 0; kyi < n; ++kyi) {
        const int ky = std::abs(s.freq_of(kyi));
        const double myz = m1[std::size_t(ky)] * m1[std::size_t(kz)];
        const std::size_t o = s.index(0, kyi, kzi);
        for (int kxi = 0; kxi <= n / 2; ++kxi) d[o + kxi] *= m1[std::size_t(kxi)] * myz;
      }
    }
  }
  PeriodicField out(f.grid(), f.rank(), f.time());
  fft_inverse(s, out);
  out.set_band(f.band());
  out.set_trace_free(f.trace_free());
  return out;
}

}  // namespace eci
