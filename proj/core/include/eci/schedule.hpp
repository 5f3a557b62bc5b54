#pragma once

#include <string>
#include <vector>

#include "eci/errors.hpp"

namespace eci {

/// Parameters consumed by one inductive step q -> q+1.
struct StageParams {
  int q = 0;
  double delta_q = 1.0;
  double delta_q1 = 1.0;  // delta_{q+1}
  double delta_q2 = 0.5;  // delta_{q+2}
  double lambda_q = 1.0;
  long lambda_q1 = 1;     // integer so every phase lambda k.x is 2pi-periodic
  int mu = 1;
  double ell = 1.0;
};

struct ConditionCheck {
  std::string name;
  double value = 0.0;   // measured left-hand side
  double limit = 0.0;   // right-hand side
  bool pass = false;
};

/// The delta/lambda/mu/ell ladder. Strict mode derives everything from
/// (a, b, c, eps); relaxed mode takes user sequences and downgrades the
/// admissibility checks to warnings so desk-scale grids can run the full
/// code path.
class ParamSchedule {
 public:
  enum class Mode { Strict, Relaxed };

  static ParamSchedule strict(double a, double b, double c, double eps, int stages);
  /// deltas/lambdas are indexed from q=1 (the first produced stage);
  /// mus/ells are indexed by the step q = 0..stages-1.
  static ParamSchedule relaxed(std::vector<double> deltas, std::vector<long> lambdas,
                               std::vector<int> mus, std::vector<double> ells, int stages);

  Mode mode() const { return mode_; }
  int stages() const { return stages_; }
  double beta() const { return beta_; }

  double delta(int q) const;   // q >= 0, geometric extension past the list
  double lambda(int q) const;  // q >= 0 (lambda_0 = 1 by convention)
  StageParams stage(int q) const;

  /// The three admissibility conditions, the two orderings of length scales
  /// and the two monotonicity conditions, evaluated and reported per stage.
  std::vector<ConditionCheck> check_stage(int q) const;
  bool strict_mode_ok(int q) const;

 private:
  Mode mode_ = Mode::Relaxed;
  int stages_ = 0;
  double beta_ = 0.0;
  // strict
  double a_ = 0.0, b_ = 0.0, c_ = 0.0, eps_ = 0.0;
  // relaxed
  std::vector<double> deltas_;
  std::vector<long> lambdas_;
  std::vector<int> mus_;
  std::vector<double> ells_;
};

}  // namespace eci
