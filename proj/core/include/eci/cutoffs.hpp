#pragma once

#include <vector>

#include "eci/errors.hpp"

namespace eci {

/// Squared partition of unity in time: chi(u) = g(u)/sqrt(sum_l g(u-l)^2)
/// with g a C-infinity bump, g = 1 on [-1/4,1/4], supp g in (-3/4,3/4), so
/// sum_l chi^2(u-l) = 1 holds exactly by construction. Members are
/// chi_l(t) = chi(mu t - l) for integer l in [0, mu].
class CutoffFamily {
 public:
  explicit CutoffFamily(int mu) : mu_(mu) {
    if (mu < 1) throw InvalidInput("CutoffFamily: mu must be a positive integer");
  }

  int mu() const { return mu_; }

  // profile and exact derivatives
  static double chi(double u);
  static double chi_d1(double u);
  static double chi_d2(double u);

  double chi_l(int l, double t) const { return chi(mu_ * t - l); }
  double chi_l_dt(int l, double t) const { return mu_ * chi_d1(mu_ * t - l); }
  double chi_l_dtt(int l, double t) const { return double(mu_) * mu_ * chi_d2(mu_ * t - l); }

  /// Members with |mu t - l| < 3/4 and l in [0, mu] (at most two).
  std::vector<int> active(double t) const;

  /// max over a dense sample of |sum_l chi_l(t)^2 - 1| on [0,1].
  double partition_residual(int samples = 4096) const;

 private:
  int mu_;
};

}  // namespace eci
