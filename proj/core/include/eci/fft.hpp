#pragma once

#include <complex>
#include <vector>

#include "eci/grid.hpp"

namespace eci {

class PeriodicField;

/// Half-complex spectrum of a set of real scalar components on a Grid3.
///
/// Storage: comp-major, within a component idx = kx + (n/2+1)*(ky + n*kz),
/// kx in [0, n/2]; ky, kz indices map to frequencies via freq_of().
/// Coefficients are those of the trigonometric interpolant, i.e. forward
/// transforms are normalised by 1/n^3.
class Spectrum {
 public:
  Spectrum() = default;
  Spectrum(Grid3 g, int ncomp)
      : grid_(g), ncomp_(ncomp),
        data_(std::size_t(ncomp) * g.n * g.n * (g.n / 2 + 1)) {}

  Grid3 grid() const { return grid_; }
  int ncomp() const { return ncomp_; }
  int nx_half() const { return grid_.n / 2 + 1; }
  std::size_t comp_size() const { return std::size_t(grid_.n) * grid_.n * nx_half(); }

  std::complex<double>* comp(int c) { return data_.data() + comp_size() * c; }
  const std::complex<double>* comp(int c) const { return data_.data() + comp_size() * c; }

  std::size_t index(int kxi, int kyi, int kzi) const {
    return std::size_t(kxi) + std::size_t(nx_half()) * (std::size_t(kyi) + std::size_t(grid_.n) * kzi);
  }

  int freq_of(int idx) const { return idx <= grid_.n / 2 ? idx : idx - grid_.n; }

  // Max |k|_inf whose coefficient magnitude exceeds tol * max magnitude.
  int effective_band(double tol = 1e-12) const;

  std::vector<std::complex<double>>& raw() { return data_; }
  const std::vector<std::complex<double>>& raw() const { return data_; }

 private:
  Grid3 grid_;
  int ncomp_ = 0;
  std::vector<std::complex<double>> data_;
};

/// Forward r2c transform of all components, coefficients of the interpolant.
Spectrum fft_forward(const PeriodicField& f);

/// Inverse transform; out must have matching grid and component count.
void fft_inverse(const Spectrum& s, PeriodicField& out);

/// Copy modes |k|_inf < min(n_src, n_dst)/2 into a spectrum on grid m
/// (zero-padding upsample or truncating downsample). Nyquist planes dropped.
Spectrum resample(const Spectrum& s, Grid3 to);

/// In-place d/dx_axis (axis in 0..2): multiply by i*k, Nyquist plane zeroed.
void derivative_inplace(Spectrum& s, int axis);

}  // namespace eci
