#include "eci/random_fields.hpp"

#include <cmath>

#include "eci/fft.hpp"

namespace eci {

PeriodicField RandomFieldGen::field(Grid3 g, int rank, const Options& opt) {
  const int B = opt.band;
  if (B >= g.nyquist()) throw InvalidInput("RandomFieldGen: band must stay below Nyquist");
  PeriodicField out(g, rank);
  Spectrum s(g, out.ncomp());
  std::normal_distribution<double> dist(0.0, 1.0);
  const int n = g.n;

  auto idx_of = [&](int k) { return k >= 0 ? k : k + n; };

  // kx > 0 modes: free draw (conjugate partner implicit in r2c storage).
  // kx = 0 plane: draw a canonical half and mirror for Hermitian symmetry.
  for (int kz = -B; kz <= B; ++kz) {
    for (int ky = -B; ky <= B; ++ky) {
      for (int kx = 0; kx <= B; ++kx) {
        if (kx == 0 && ky == 0 && kz == 0) continue;
        const bool canonical = kx > 0 || ky > 0 || (ky == 0 && kz > 0);
        if (!canonical) continue;
        const double decay = 1.0 / (1.0 + kx * kx + ky * ky + kz * kz);
        for (int c = 0; c < out.ncomp(); ++c) {
          const std::complex<double> z(dist(rng_) * decay, dist(rng_) * decay);
          s.comp(c)[s.index(kx, idx_of(ky), idx_of(kz))] = z;
          if (kx == 0)
            s.comp(c)[s.index(0, idx_of(-ky), idx_of(-kz))] = std::conj(z);
        }
      }
    }
  }

  if (!opt.zero_mean) {
    for (int c = 0; c < out.ncomp(); ++c)
      s.comp(c)[s.index(0, 0, 0)] = dist(rng_);
  }

  if (rank == 1 && opt.divergence_free) {
    for (int kz = -B; kz <= B; ++kz) {
      for (int ky = -B; ky <= B; ++ky) {
        for (int kx = 0; kx <= B; ++kx) {
          const double k2 = double(kx) * kx + double(ky) * ky + double(kz) * kz;
          if (k2 == 0.0) continue;
          const std::size_t i = s.index(kx, idx_of(ky), idx_of(kz));
          const std::complex<double> d =
              (double(kx) * s.comp(0)[i] + double(ky) * s.comp(1)[i] +
               double(kz) * s.comp(2)[i]) / k2;
          s.comp(0)[i] -= double(kx) * d;
          s.comp(1)[i] -= double(ky) * d;
          s.comp(2)[i] -= double(kz) * d;
        }
      }
    }
  }

  fft_inverse(s, out);

  if (rank == 2) {
    if (opt.trace_free) out.remove_trace();
    else {
      // keep components independent; nothing to do
    }
  }

  const double m = out.max_abs();
  if (m > 0.0) out *= opt.amplitude / m;
  out.set_band(B);
  return out;
}

}  // namespace eci
