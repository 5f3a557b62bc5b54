#pragma once

#include <vector>

#include "eci/energy.hpp"
#include "eci/field.hpp"

namespace eci {

/// One time sample of the Euler-Reynolds triple.
struct StateSlice {
  double t = 0.0;
  PeriodicField v;  // rank 1, divergence-free
  PeriodicField p;  // rank 0, mean zero
  PeriodicField R;  // rank 2, symmetric trace-free
};

struct StateInvariantReport {
  double max_div_v_rel = 0.0;
  double max_trace_rel = 0.0;
  double max_mean_p = 0.0;
  double residual = 0.0;  // Euler-Reynolds residual, centered differences in t
  double recorded_tol = 0.0;
  bool ok = true;
};

/// The triple (v_q, p_q, R_q) sampled at a set of times; the residual of the
/// Euler-Reynolds system is its defining invariant.
class EulerReynoldsState {
 public:
  int stage = 0;
  Grid3 grid;
  std::vector<StateSlice> slices;
  double residual_tol = 0.0;

  static EulerReynoldsState zero(Grid3 g, const std::vector<double>& times);

  std::size_t index_of_time(double t) const;  // exact sample lookup
  const StateSlice& at_time(double t) const { return slices[index_of_time(t)]; }

  double sup_v() const;

  StateInvariantReport check_invariants() const;
};

/// Analytic non-trivial Euler-Reynolds state for sweeps and oracles: a
/// Beltrami flow with time-modulated amplitude psi(t) = mod_mean +
/// mod_cos cos(2 pi t),
///   v = psi W,  p = -psi^2 |W|^2 / 2 (centered),  R = psi' * Rop(W),
/// which solves the system exactly (Rop(W) = -(grad W + grad W^T)/(lam lam_bar)^2).
struct SeededStateSpec {
  int lambda0 = 1;
  double amplitude = 0.5;
  double mod_mean = 1.0;
  double mod_cos = 0.001;
};

EulerReynoldsState make_seeded_state(Grid3 g, const std::vector<double>& times,
                                     const SeededStateSpec& spec);

/// e(t) = psi(t)^2 |W|_{L^2}^2 / (1 - delta_1), the profile under which the
/// seeded state satisfies the energy hypothesis exactly.
EnergyProfile seeded_energy_profile(Grid3 g, const SeededStateSpec& spec, double delta_1);

}  // namespace eci
