#pragma once

#include <array>
#include <string>
#include <vector>

#include "eci/grid.hpp"
#include "eci/sym3.hpp"

namespace eci {

/// Scalar (rank 0), vector (rank 1) or symmetric-tensor (rank 2) samples on a
/// uniform 3-torus grid at one time. The universal carrier for v, p, R, w, Phi.
///
/// Rank-2 fields hold the 6 independent components (xx,xy,xz,yy,yz,zz) and are
/// symmetric by construction. `band` is a conservative |k|_inf bound on the
/// spectral support (-1 = unknown, treat as Nyquist); products use it to pick
/// de-aliased resolutions.
class PeriodicField {
 public:
  PeriodicField() = default;
  PeriodicField(Grid3 g, int rank, double time = 0.0);

  static PeriodicField scalar(Grid3 g, double time = 0.0) { return PeriodicField(g, 0, time); }
  static PeriodicField vector(Grid3 g, double time = 0.0) { return PeriodicField(g, 1, time); }
  static PeriodicField tensor(Grid3 g, double time = 0.0) { return PeriodicField(g, 2, time); }

  Grid3 grid() const { return grid_; }
  int rank() const { return rank_; }
  int ncomp() const { return ncomp_; }
  std::size_t nodes() const { return grid_.node_count(); }

  double time() const { return time_; }
  void set_time(double t) { time_ = t; }

  bool trace_free() const { return trace_free_; }
  void set_trace_free(bool f) { trace_free_ = f; }

  int band() const { return band_ < 0 ? grid_.nyquist() : band_; }
  void set_band(int b) { band_ = b > grid_.nyquist() ? grid_.nyquist() : b; }

  double* comp(int c) { return data_.data() + nodes() * c; }
  const double* comp(int c) const { return data_.data() + nodes() * c; }

  double& at(int c, int ix, int iy, int iz) { return comp(c)[grid_.index(ix, iy, iz)]; }
  double at(int c, int ix, int iy, int iz) const { return comp(c)[grid_.index(ix, iy, iz)]; }

  Sym3 tensor_at(std::size_t node) const;
  std::array<double, 3> vector_at(std::size_t node) const;

  std::vector<double>& raw() { return data_; }
  const std::vector<double>& raw() const { return data_; }

  // -- in-place arithmetic (same grid/rank) --
  PeriodicField& operator+=(const PeriodicField& o);
  PeriodicField& operator-=(const PeriodicField& o);
  PeriodicField& operator*=(double s);
  void axpy(double a, const PeriodicField& x);  // this += a*x
  void fill(double v);

  /// Pointwise norm at every node: |.| for scalars, Euclidean for vectors,
  /// operator norm for tensors; sup over nodes in deterministic order.
  double sup_norm() const;
  /// Max |component value| over all nodes and components.
  double max_abs() const;
  /// Kahan-compensated mean of one component over nodes.
  double mean(int c = 0) const;
  /// Max |trace| over nodes (rank 2).
  double max_trace() const;
  /// Remove the trace pointwise (rank 2).
  void remove_trace();

  bool is_zero(double tol = 0.0) const;

 private:
  Grid3 grid_;
  int rank_ = 0;
  int ncomp_ = 1;
  double time_ = 0.0;
  bool trace_free_ = false;
  int band_ = -1;
  std::vector<double> data_;
};

}  // namespace eci
