#pragma once

#include <memory>
#include <vector>

#include "eci/field.hpp"

namespace eci {

struct InterpParams {
  int points = 10;      // Lagrange stencil width per axis
  int oversample = 20;  // fine grid >= oversample * band
  int max_grid = 192;
  int min_grid = 32;
};

/// Raw tensorised-Lagrange evaluation on a fine periodic grid.
struct LagrangeCtx {
  const double* data = nullptr;  // comp-major fine-grid samples
  int n = 0;
  int ncomp = 0;
  int points = 0;
  const double* denom_inv = nullptr;
};

void lagrange_eval(const LagrangeCtx& ctx, double x, double y, double z, double* out);

/// Off-grid evaluation of a band-limited periodic field: the spectrum is
/// zero-padded onto a fine grid and values are read off with tensorised
/// local Lagrange interpolation. For band B and fine spacing h the per-mode
/// error is ~ (Bh/2)^P / C(P,P/2), far below the 1e-8 flow tolerances at the
/// default oversampling.
class TrigInterpolator {
 public:
  explicit TrigInterpolator(const PeriodicField& f, InterpParams p = {});

  int ncomp() const { return ncomp_; }
  Grid3 fine_grid() const { return fine_; }
  const std::vector<double>& fine_data() const { return data_; }
  const std::vector<double>& denominators() const { return denom_inv_; }
  int points() const { return points_; }

  LagrangeCtx ctx() const {
    return {data_.data(), fine_.n, ncomp_, points_, denom_inv_.data()};
  }

  /// Evaluate every component at one point (coordinates wrapped mod 2pi).
  void eval(double x, double y, double z, double* out) const {
    lagrange_eval(ctx(), x, y, z, out);
  }

  double single(double x, double y, double z) const {
    double v;
    eval(x, y, z, &v);
    return v;
  }

 private:
  Grid3 fine_;
  int ncomp_ = 0;
  int points_ = 0;
  std::vector<double> data_;
  std::vector<double> denom_inv_;
};

}  // namespace eci
