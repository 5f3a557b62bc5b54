#pragma once

#include <string>
#include <vector>

#include "eci/beltrami.hpp"
#include "eci/field.hpp"
#include "eci/mollifier.hpp"

namespace eci {

/// One sweep measurement: value of a norm (or integral) at one sweep point.
struct DecayRow {
  double sweep = 0.0;
  double value = 0.0;
};

/// Log-log sweep with fitted order. `order` is the exponent p in
/// value ~ C * sweep^p, from a least-squares fit; for decays in a growing
/// parameter (lambda) p is negative, and `decay_order` = -p is what the
/// acceptance thresholds compare against.
struct DecayReport {
  std::string check;
  std::vector<DecayRow> rows;
  double order = 0.0;
  double decay_order = 0.0;
  bool truncated = false;  // sweep left the resolved band and was cut short

  std::string csv() const;  // versioned header, one row per sweep point
};

/// Least-squares slope of log(value) against log(sweep); rows with value
/// below `floor_value` are dropped (measurement noise floor).
double fit_loglog_order(const std::vector<DecayRow>& rows, double floor_value = 1e-300);

/// |avg of a e^{i lambda k.x}| per lambda (Prop E.1(i) mechanism).
DecayReport stationary_phase_integral_decay(const PeriodicField& a, Ivec3 k,
                                            const std::vector<int>& lambdas);

/// ||R(2 Re(a e^{i lambda k.x}))||_alpha per lambda (Prop E.1(ii) mechanism);
/// a is a vector amplitude.
DecayReport stationary_phase_r_decay(const PeriodicField& a, Ivec3 k,
                                     const std::vector<int>& lambdas, double alpha);

/// ||[b, R](2 Re(a e^{i lambda k.x}))||_alpha per lambda (Prop F.1 mechanism).
DecayReport br_commutator_decay(const PeriodicField& b, const PeriodicField& a, Ivec3 k,
                                const std::vector<int>& lambdas, double alpha);

/// ||(f*psi)(g*psi) - (fg)*psi||_0 per ell (Prop C.1 mechanism, r = 0).
DecayReport cet_defect_sweep(const PeriodicField& f, const PeriodicField& g,
                             const std::vector<double>& ells);

}  // namespace eci
