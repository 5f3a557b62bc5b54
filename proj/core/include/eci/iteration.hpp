#pragma once

#include <functional>
#include <optional>

#include "eci/beltrami.hpp"
#include "eci/cutoffs.hpp"
#include "eci/energy.hpp"
#include "eci/geometry.hpp"
#include "eci/interp.hpp"
#include "eci/mollifier.hpp"
#include "eci/schedule.hpp"
#include "eci/state.hpp"
#include "eci/transport.hpp"

namespace eci {

/// Everything one inductive step needs besides the input state.
struct StepContext {
  const StandardFamily* family = nullptr;  // modes + certified gamma solvers
  EnergyProfile energy;
  StageParams params;
  Grid3 output_grid;
  // flow maps + stress transport; mollified velocities are low-band, so a
  // moderate oversampling keeps the evaluation grids (and memory) small
  InterpParams flow_interp{8, 12, 128, 32};
  double out_dt = 0.0;            // 0 -> 1/(8 mu)
  bool relaxed = true;            // condition failures warn instead of aborting
  int doublesum_sample_stride = 0;  // 0 = skip; else evaluate every k-th sample
  bool keep_components = true;    // false: drop R^0..R^5 fields once measured
};

/// Measured constants of the step (see the spec's constants operation).
struct StepConstants {
  double C0 = 0.0;  // measured bracketing constant of rho_l
  double eta = 0.0; // r0 min(e) / (4 C0)
  double M = 0.0;   // 2 C0 |Lambda| max(e)
  double r0 = 0.0;
  double rho_min = 0.0, rho_max = 0.0;
};

/// Per-sample diagnostics row; columns() defines the CSV schema.
struct StepDiagnostics {
  int q_next = 0;
  static const std::vector<std::string>& columns();
  std::vector<std::vector<double>> rows;
  StepConstants constants;
  std::vector<ConditionCheck> conditions;
  double partition_residual = 0.0;
  double runtime_seconds = 0.0;
  bool mollifier_under_resolved = false;

  std::string csv() const;  // versioned schema, one row per (q+1, t_j)
};

using SliceSink = std::function<void(const StateSlice&, const std::vector<double>& row)>;

struct StepResult {
  std::optional<EulerReynoldsState> next_state;
  StepDiagnostics diagnostics;
};

/// The full inductive step: mollify -> rho_l -> flow maps -> transported
/// stresses -> perturbation -> new pressure and Reynolds stress, across all
/// time samples. `sink` (optional) receives each finished slice; the new
/// state is retained in memory when `retain_state` is set.
StepResult run_step(const EulerReynoldsState& state_q, const StepContext& ctx,
                    bool retain_state = true, const SliceSink& sink = {});

/// Measured constants from the energy profile and certified solver data.
StepConstants compute_constants(const EnergyProfile& e, const StandardFamily& family,
                                const std::vector<double>& rhos, double delta_q1);

// ---- single-sample pieces (the spec's per-operation surface) --------------

struct PerturbationPiece {
  PeriodicField wo, wc;            // output grid
  PeriodicField dtw_analytic;      // D_t w along the mollified flow
  std::vector<int> active_l;
  // per active l (same order): rho_l, flow map, transported stress, and the
  // six pair amplitudes a_{kl}, all on the factor grid
  std::vector<double> rho;
  std::vector<FlowMap> flows;
  std::vector<PeriodicField> transported;         // rank 2
  std::vector<std::vector<PeriodicField>> amps;   // [l][pair] scalars (factor grid)
};

struct StressAssembly {
  PeriodicField p1;                   // mean zero
  PeriodicField R1;                   // sum of the six components
  std::array<PeriodicField, 6> comp;  // R^0 .. R^5 (empty if not kept)
  std::array<double, 6> comp_sup = {0, 0, 0, 0, 0, 0};
  double recenter_constant = 0.0;
  PeriodicField v1;
  PeriodicField residual_rhs_analytic;  // div R1 - grad p1 - div(v1 x v1) - dt(v)|analytic
};

class StepExecutor {
 public:
  StepExecutor(const EulerReynoldsState& in, const StepContext& ctx);

  const std::vector<double>& output_times() const { return out_times_; }
  const StepConstants& constants() const { return constants_; }
  const CutoffFamily& cutoffs() const { return cutoffs_; }
  double rho_l(int l) const { return rho_[std::size_t(l)]; }

  PerturbationPiece perturbation(double t);
  StressAssembly new_stress(double t, const PerturbationPiece& pert);

  /// The Lemma 3.1 identity residual at one sample, all three terms
  /// assembled independently (the cross sum explicitly over mode pairs).
  double doublesum_residual(double t, const PerturbationPiece& pert);

  /// Route comparison for the oscillation cancellation: R^1 from the full
  /// divergence vs. R^1 assembled from the gradient terms only (the exact
  /// symmetrised frequency term removed algebraically).
  double oscillation_cancellation_residual(double t, const PerturbationPiece& pert);

 private:
  friend StepResult run_step(const EulerReynoldsState&, const StepContext&, bool,
                             const SliceSink&);
  struct LPieces;
  LPieces l_pieces(int l, double t);

  const EulerReynoldsState& in_;
  StepContext ctx_;
  Grid3 gf_;   // factor grid (= input grid)
  Grid3 g1_;   // output grid
  CutoffFamily cutoffs_;
  Mollifier mollifier_;
  std::vector<double> out_times_;
  std::vector<double> rho_;
  std::vector<PeriodicField> r_ell_anchor_;   // mollified stress at l/mu
  std::vector<PeriodicField> v_ell_slices_;   // mollified velocity slices (factor grid)
  std::unique_ptr<VelocitySampler> v_sampler_;
  StepConstants constants_;
  // per-sample cache of mollified v at t on both grids
  PeriodicField v_ell_out(double t);
  PeriodicField mollified_R_at(double t);
};

/// p1 = p - |wo|^2/2 - |wc|^2/3 - 2<wo,wc>/3 - 2<v - v_ell, w>/3, recentered.
/// (exposed for tests; run_step uses the de-aliased |wo|^2 shared with R^1)
PeriodicField new_pressure(const PeriodicField& p, const PeriodicField& wo,
                           const PeriodicField& wc, const PeriodicField& v,
                           const PeriodicField& v_ell, double* recenter = nullptr);

}  // namespace eci
