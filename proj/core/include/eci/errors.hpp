#pragma once

#include <stdexcept>
#include <string>

namespace eci {

// Base for all numeric-contract violations raised by the library.
struct EciError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Spectral content would not fit the requested grid.
struct AliasingError : EciError {
  using EciError::EciError;
};

// Input rejected before any computation (bad family, broken symmetry, ...).
struct InvalidInput : EciError {
  using EciError::EciError;
};

// gamma_eval called outside the certified ball; carries the offending distance.
struct OutOfBallError : EciError {
  double distance;
  double radius;
  OutOfBallError(double d, double r0)
      : EciError("matrix outside certified ball: |R - Id| = " + std::to_string(d) +
                 " > r0 = " + std::to_string(r0)),
        distance(d), radius(r0) {}
};

// Energy hypothesis violated: rho_l <= 0 at some cutoff index.
struct EnergyGapError : EciError {
  using EciError::EciError;
};

}  // namespace eci
