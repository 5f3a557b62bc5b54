#include "eci/interp.hpp"

#include <cmath>

#include "eci/field_ops.hpp"

namespace eci {

TrigInterpolator::TrigInterpolator(const PeriodicField& f, InterpParams p)
    : ncomp_(f.ncomp()), points_(p.points) {
  const int band = std::max(f.band(), 1);
  int m = next_fft_size(std::max(p.min_grid, p.oversample * std::max(band, 2)));
  m = std::min(m, std::max(p.max_grid, f.grid().n));
  fine_ = Grid3(m);
  PeriodicField fine_field = (m == f.grid().n) ? f : regrid(f, fine_);
  data_ = std::move(fine_field.raw());

  denom_inv_.assign(std::size_t(points_), 0.0);
  for (int j = 0; j < points_; ++j) {
    double d = 1.0;
    for (int k = 0; k < points_; ++k)
      if (k != j) d *= double(j - k);
    denom_inv_[std::size_t(j)] = 1.0 / d;
  }
}

void lagrange_eval(const LagrangeCtx& ctx, double x, double y, double z, double* out) {
  const int n = ctx.n;
  const int P = ctx.points;
  const double scale = n / kTwoPi;

  double w[3][16];
  int idx[3][16];
  const double coords[3] = {x, y, z};
  for (int ax = 0; ax < 3; ++ax) {
    double u = coords[ax] * scale;
    u -= std::floor(u / n) * n;  // wrap into [0, n)
    const int base = int(std::floor(u)) - (P / 2 - 1);
    const double delta = u - base;
    // Lagrange weights via prefix/suffix products (no division by near-zero)
    double pre[17], suf[17];
    pre[0] = 1.0;
    for (int j = 0; j < P; ++j) pre[j + 1] = pre[j] * (delta - j);
    suf[P] = 1.0;
    for (int j = P - 1; j >= 0; --j) suf[j] = suf[j + 1] * (delta - j);
    for (int j = 0; j < P; ++j) {
      w[ax][j] = pre[j] * suf[j + 1] * ctx.denom_inv[j];
      int ii = base + j;
      ii %= n;
      if (ii < 0) ii += n;
      idx[ax][j] = ii;
    }
  }

  const std::size_t npl = std::size_t(n) * n;
  const std::size_t ncube = npl * std::size_t(n);
  for (int c = 0; c < ctx.ncomp; ++c) {
    const double* d = ctx.data + std::size_t(c) * ncube;
    double acc = 0.0;
    for (int jz = 0; jz < P; ++jz) {
      const double* dz = d + std::size_t(idx[2][jz]) * npl;
      double accy = 0.0;
      for (int jy = 0; jy < P; ++jy) {
        const double* row = dz + std::size_t(idx[1][jy]) * std::size_t(n);
        double accx = 0.0;
        for (int jx = 0; jx < P; ++jx) accx += w[0][jx] * row[idx[0][jx]];
        accy += w[1][jy] * accx;
      }
      acc += w[2][jz] * accy;
    }
    out[c] = acc;
  }
}

}  // namespace eci
