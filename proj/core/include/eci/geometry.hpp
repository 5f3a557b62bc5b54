#pragma once

#include <string>
#include <vector>

#include "eci/beltrami.hpp"
#include "eci/sym3.hpp"

namespace eci {

/// Decomposition R = (1/2) sum_{k in Lambda} c_k(R) (Id - khat x khat) with
/// c_k affine in R (here linear: minimum-norm solution of the component
/// equations), c_k = c_{-k}, and positivity certified on the operator-norm
/// ball |R - Id| <= r0 with margin m0. gamma_k(R) = sqrt(c_k(R)).
class GammaSolver {
 public:
  const std::vector<Ivec3>& frequencies() const { return freqs_; }  // signed set
  std::size_t pair_count() const { return pair_reps_.size(); }
  const std::vector<Ivec3>& pair_reps() const { return pair_reps_; }

  double r0() const { return r0_; }
  double m0() const { return m0_; }

  /// c_p(R) per canonical pair, linear in R; no ball check.
  std::vector<double> coefficients(const Sym3& R) const;
  /// gamma_p(R) = sqrt(c_p(R)); throws OutOfBallError if |R - Id| > r0.
  std::vector<double> gamma(const Sym3& R) const;
  /// gamma for the signed frequency list order (gamma_k = gamma_{-k}).
  double gamma_for(std::size_t signed_index, const std::vector<double>& gammas) const;

  Sym3 reconstruct(const std::vector<double>& coeffs) const;
  double reconstruction_residual(const Sym3& R) const;  // |reconstruct(c(R)) - R|_op

  /// Operator-norm bound of the linear map R -> c_p(R), estimated by sampling.
  double linear_norm_estimate(std::size_t pair) const;

  /// c_p as coefficients against the six stored components (off-diagonals
  /// already double-counted): c_p(R) = sum_c weighted_row(p)[c] * R.v[c].
  std::array<double, 6> weighted_row(std::size_t pair) const;
  double c_at_identity(std::size_t pair) const;

  std::string to_json() const;
  static GammaSolver from_json(const std::string& text);

  friend GammaSolver build_gamma_solver(const std::vector<Ivec3>& family, double m0,
                                        int cert_samples);

 private:
  std::vector<Ivec3> freqs_;
  std::vector<Ivec3> pair_reps_;
  std::vector<std::size_t> pair_of_signed_;   // signed index -> pair index
  std::vector<std::array<double, 6>> lin_;    // c_p(R) = sum_c lin_[p][c]*w_c*R_c
  double r0_ = 0.0;
  double m0_ = 0.0;
};

/// Build from a negation-closed family spanning the symmetric matrices;
/// certifies r0 by bisection over Sobol-sampled spheres |R - Id| = r.
/// Rejects span-deficient families and families with certified r0 < 0.01.
GammaSolver build_gamma_solver(const std::vector<Ivec3>& family, double m0 = 1e-3,
                               int cert_samples = 100000);

/// The default lambda_bar^2 = 5 instantiation: deterministic search over the
/// 12 +/- pairs for the disjoint 6+6 split maximising the smaller certified
/// radius. Returns the family plus both solvers (even first).
struct StandardFamily {
  ModeFamily family;
  GammaSolver even_solver;
  GammaSolver odd_solver;
};
const StandardFamily& standard_family();

/// Low-discrepancy points in [0,1)^dim (Sobol, first 6 dimensions).
class Sobol {
 public:
  explicit Sobol(int dim);
  std::vector<double> next();

 private:
  int dim_;
  unsigned long long count_ = 0;
  std::vector<std::vector<unsigned>> dirs_;  // per dim, 32 direction integers
  std::vector<unsigned> state_;
};

/// Symmetric direction of unit operator norm from a [0,1)^6 point.
Sym3 unit_sym3_direction(const std::vector<double>& u);

}  // namespace eci
