#include "eci/field.hpp"

#include <algorithm>
#include <cmath>

namespace eci {

namespace {
int ncomp_for(int rank) {
  switch (rank) {
    case 0: return 1;
    case 1: return 3;
    case 2: return 6;
    default: throw InvalidInput("PeriodicField: rank must be 0, 1 or 2");
  }
}
}  // namespace

PeriodicField::PeriodicField(Grid3 g, int rank, double time)
    : grid_(g), rank_(rank), ncomp_(ncomp_for(rank)), time_(time),
      data_(std::size_t(ncomp_for(rank)) * g.node_count(), 0.0) {}

Sym3 PeriodicField::tensor_at(std::size_t node) const {
  Sym3 s;
  for (int c = 0; c < 6; ++c) s.v[c] = comp(c)[node];
  return s;
}

std::array<double, 3> PeriodicField::vector_at(std::size_t node) const {
  return {comp(0)[node], comp(1)[node], comp(2)[node]};
}

PeriodicField& PeriodicField::operator+=(const PeriodicField& o) {
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
  band_ = std::max(band(), o.band());
  return *this;
}

PeriodicField& PeriodicField::operator-=(const PeriodicField& o) {
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
  band_ = std::max(band(), o.band());
  return *this;
}

PeriodicField& PeriodicField::operator*=(double s) {
  for (auto& x : data_) x *= s;
  return *this;
}

void PeriodicField::axpy(double a, const PeriodicField& x) {
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += a * x.data_[i];
  band_ = std::max(band(), x.band());
}

void PeriodicField::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

double PeriodicField::sup_norm() const {
  const std::size_t nn = nodes();
  double m = 0.0;
  if (rank_ == 0) {
    const double* d = comp(0);
    for (std::size_t i = 0; i < nn; ++i) m = std::max(m, std::abs(d[i]));
  } else if (rank_ == 1) {
    const double *x = comp(0), *y = comp(1), *z = comp(2);
    for (std::size_t i = 0; i < nn; ++i)
      m = std::max(m, x[i] * x[i] + y[i] * y[i] + z[i] * z[i]);
    m = std::sqrt(m);
  } else {
    for (std::size_t i = 0; i < nn; ++i) m = std::max(m, sym3_opnorm(tensor_at(i)));
  }
  return m;
}

double PeriodicField::max_abs() const {
  double m = 0.0;
  for (double x : data_) m = std::max(m, std::abs(x));
  return m;
}

double PeriodicField::mean(int c) const {
  const double* d = comp(c);
  double sum = 0.0, comp_err = 0.0;
  for (std::size_t i = 0; i < nodes(); ++i) {
    const double y = d[i] - comp_err;
    const double t = sum + y;
    comp_err = (t - sum) - y;
    sum = t;
  }
  return sum / double(nodes());
}

double PeriodicField::max_trace() const {
  const double *xx = comp(0), *yy = comp(3), *zz = comp(5);
  double m = 0.0;
  for (std::size_t i = 0; i < nodes(); ++i)
    m = std::max(m, std::abs(xx[i] + yy[i] + zz[i]));
  return m;
}

void PeriodicField::remove_trace() {
  double *xx = comp(0), *yy = comp(3), *zz = comp(5);
  for (std::size_t i = 0; i < nodes(); ++i) {
    const double t = (xx[i] + yy[i] + zz[i]) / 3.0;
    xx[i] -= t;
    yy[i] -= t;
    zz[i] -= t;
  }
  trace_free_ = true;
}

bool PeriodicField::is_zero(double tol) const {
  for (double x : data_)
    if (std::abs(x) > tol) return false;
  return true;
}

}  // namespace eci
