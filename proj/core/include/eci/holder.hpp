#pragma once

#include <vector>

#include "eci/field.hpp"

namespace eci {

/// Numerical Hoelder norm ||f||_{order+alpha} on a grid:
///   [f]_j as the max over |beta|=j of sup-norms of spectral derivatives,
///   [f]_{order+alpha} estimated over axis-aligned node pairs at separations
///   {2 pi m / N : m = 1, 2, 4, ..., N/2}. The reported value is a lower
///   bound of the true seminorm, exact in the integer-order part for
///   band-limited f.
struct HolderNormReport {
  int order = 0;
  double alpha = 0.0;
  double value = 0.0;      // sum_j [f]_j + [f]_{order+alpha}
  double seminorm = 0.0;   // [f]_{order+alpha} (0 when alpha == 0)
  std::vector<double> integer_seminorms;  // [f]_j, j = 0..order
  std::vector<int> separations;           // node offsets sampled
};

HolderNormReport holder_norm(const PeriodicField& f, int order, double alpha);

/// [f]_m for integer m (max over multi-indices of derivative sup-norms).
double holder_seminorm_int(const PeriodicField& f, int m);

/// ||f||_m = sum_{j<=m} [f]_j.
double holder_norm_int(const PeriodicField& f, int m);

}  // namespace eci
