#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <memory>
#include <vector>

#include "eci/field.hpp"
#include "eci/interp.hpp"

namespace eci {

/// Time-sampled velocity with linear interpolation between stored slices and
/// lazily built spatial interpolators (at most a few cached at once). All
/// slices share one fine evaluation grid so blended evaluation contexts can
/// be formed without re-gridding.
class VelocitySampler {
 public:
  explicit VelocitySampler(const std::vector<PeriodicField>* slices, InterpParams interp = {});

  bool zero() const { return zero_; }
  bool steady() const { return steady_; }
  double sup_norm() const { return sup_; }
  int max_band() const { return band_; }

  void eval(double x, double y, double z, double t, double out[3]) const;

  using InterpPtr = std::shared_ptr<const TrigInterpolator>;

  /// Bracketing slice interpolators (pinned) and the linear weight at time t.
  void bracket(double t, InterpPtr* lo, InterpPtr* hi, double* theta) const;

  const std::vector<PeriodicField>& slices() const { return *slices_; }
  InterpPtr interp_for(std::size_t slice_index) const;

 private:
  const std::vector<PeriodicField>* slices_;
  InterpParams params_;
  bool zero_ = true;
  bool steady_ = true;
  double sup_ = 0.0;
  int band_ = 0;
  mutable std::map<std::size_t, InterpPtr> cache_;
};

/// Inverse flow map anchored at t0 = l/mu: displacement Phi(x,t) - x (a
/// periodic vector field on the solve grid) plus its spectral Jacobian rows.
struct FlowMap {
  double anchor_time = 0.0;
  double eval_time = 0.0;
  PeriodicField displacement;                  // rank 1
  std::array<PeriodicField, 3> jacobian_rows;  // row i = grad Phi_i (incl. Id)
  bool cfl_flagged = false;
  double max_deviation = 0.0;  // ||DPhi - Id||_0 (operator norm at nodes)
};

struct FlowSolveParams {
  InterpParams interp;
  double step_cap_mu_factor = 20.0;   // step <= 1/(20 mu)
  double step_cap_cfl_factor = 10.0;  // step <= (10 |v| N / 2pi)^{-1}
};

/// Integrate node-anchored characteristics of the velocity from time t back
/// to the anchor l/mu with classical RK4; exact for the zero field.
FlowMap solve_flow_map(const VelocitySampler& vel, Grid3 solve_grid, int l, int mu, double t,
                       const FlowSolveParams& params = {});

/// R_transported(x,t) = R_anchor(Phi(x,t)): values transported, trace removed
/// after interpolation so symmetric trace-freeness is exact.
PeriodicField transported_stress(const PeriodicField& stress_at_anchor, const FlowMap& flow,
                                 Grid3 out_grid, const InterpParams& interp = {});

/// Dump a flow map in the field snapshot format: <prefix>_disp.field plus
/// <prefix>_jac{0,1,2}.field for the Jacobian rows.
void write_flow_snapshot(const std::filesystem::path& prefix, const FlowMap& flow);

/// Transport-equation bounds (max principle, first-order Gronwall, DPhi-Id)
/// checked pointwise in t for d_t f + v.grad f = g, f(t0) = f0.
struct TransportCheckRow {
  double t;
  double f_sup, f_sup_bound;
  double f_1, f_1_bound;
  double dphi_dev, dphi_bound;
};

struct TransportCheckReport {
  std::vector<TransportCheckRow> rows;
  bool max_principle_ok = true;
  bool gronwall_ok = true;
  bool dphi_ok = true;
  bool all_ok() const { return max_principle_ok && gronwall_ok && dphi_ok; }
};

TransportCheckReport verify_transport_estimates(const VelocitySampler& vel,
                                                const PeriodicField& f0,
                                                const PeriodicField& g, double t0,
                                                double horizon, int time_checks,
                                                const FlowSolveParams& params = {});

}  // namespace eci
