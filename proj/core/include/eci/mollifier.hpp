#pragma once

#include <map>

#include "eci/field.hpp"

namespace eci {

/// Spatial mollifier: tensorised smooth bump profile g(u) = exp(-1/(1-u^2))
/// truncated at |u| = 1, scaled to length ell per axis and normalised to unit
/// mass. Applied as a spectral multiplier (the kernel transform sampled by
/// quadrature), which is the periodic convolution exactly.
class Mollifier {
 public:
  explicit Mollifier(double ell);

  double ell() const { return ell_; }

  /// 1-D transform of the unit-mass profile at continuous frequency xi
  /// (psi_hat(0) = 1 exactly).
  double psi_hat_1d(double xi) const;

  /// Multiplier at integer frequency vector (kx,ky,kz).
  double multiplier(int kx, int ky, int kz) const;

  /// Convolution in space only; mean preserved.
  PeriodicField apply(const PeriodicField& f) const;

  /// Kernel support below one grid cell: flagged, not fatal.
  bool under_resolved(Grid3 g) const { return ell_ < g.spacing(); }

 private:
  double ell_;
  double inv_mass_;                     // 1 / integral of the raw bump
  mutable std::map<long long, double> cache_;  // quantised xi -> psi_hat
};

}  // namespace eci
