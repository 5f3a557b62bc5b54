#pragma once

#include <string>
#include <vector>

#include "eci/field.hpp"

namespace eci {

/// Prescribed kinetic-energy profile e(t) on [0,1], a trigonometric
/// polynomial: e(t) = c0 + sum_j (cos_c[j-1] cos(2 pi j t) + sin_c[j-1] sin(2 pi j t)).
struct EnergyProfile {
  double c0 = 1.0;
  std::vector<double> cos_c;
  std::vector<double> sin_c;

  double operator()(double t) const;
  double min_value() const;
  double max_value() const;
  bool positive() const { return min_value() > 0.0; }
};

/// rho_l = (3 (2pi)^3)^{-1} (e(l/mu)(1 - delta_{q+2}) - integral |v|^2(., l/mu));
/// quadrature by grid average. Throws EnergyGapError if the result is not
/// positive (energy hypothesis violated).
double energy_gap(const EnergyProfile& e, const PeriodicField& v_at_tl, double t_l,
                  double delta_q2);

}  // namespace eci
