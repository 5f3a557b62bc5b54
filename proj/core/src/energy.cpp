#include "eci/energy.hpp"

#include <cmath>

#include "eci/field_ops.hpp"

namespace eci {

double EnergyProfile::operator()(double t) const {
  double v = c0;
  for (std::size_t j = 0; j < cos_c.size(); ++j) v += cos_c[j] * std::cos(kTwoPi * (j + 1) * t);
  for (std::size_t j = 0; j < sin_c.size(); ++j) v += sin_c[j] * std::sin(kTwoPi * (j + 1) * t);
  return v;
}

namespace {
constexpr int kDenseSamples = 1 << 14;
}

double EnergyProfile::min_value() const {
  double m = (*this)(0.0);
  for (int i = 1; i <= kDenseSamples; ++i) m = std::min(m, (*this)(double(i) / kDenseSamples));
  return m;
}

double EnergyProfile::max_value() const {
  double m = (*this)(0.0);
  for (int i = 1; i <= kDenseSamples; ++i) m = std::max(m, (*this)(double(i) / kDenseSamples));
  return m;
}

double energy_gap(const EnergyProfile& e, const PeriodicField& v_at_tl, double t_l,
                  double delta_q2) {
  const double vol = kTwoPi * kTwoPi * kTwoPi;
  const double kinetic = mean_square(v_at_tl) * vol;
  const double rho = (e(t_l) * (1.0 - delta_q2) - kinetic) / (3.0 * vol);
  if (!(rho > 0.0))
    throw EnergyGapError("energy_gap: rho_l <= 0 at t = " + std::to_string(t_l) +
                         " (energy hypothesis violated)");
  return rho;
}

}  // namespace eci
