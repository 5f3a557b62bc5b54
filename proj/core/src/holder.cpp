#include "eci/holder.hpp"

#include <algorithm>
#include <cmath>

#include "eci/fft.hpp"
#include "eci/field_ops.hpp"

namespace eci {

namespace {

std::vector<std::array<int, 3>> multi_indices(int m) {
  std::vector<std::array<int, 3>> out;
  for (int b1 = m; b1 >= 0; --b1)
    for (int b2 = m - b1; b2 >= 0; --b2)
      out.push_back({b1, b2, m - b1 - b2});
  return out;
}

// D^beta f from the cached spectrum of f; all components.
PeriodicField derive(const Spectrum& base, const PeriodicField& like,
                     const std::array<int, 3>& beta) {
  Spectrum s = base;
  for (int ax = 0; ax < 3; ++ax)
    for (int rep = 0; rep < beta[ax]; ++rep) derivative_inplace(s, ax);
  PeriodicField out(like.grid(), like.rank(), like.time());
  fft_inverse(s, out);
  return out;
}

// Pointwise norm of the difference of g at node i and at the node shifted by
// `off` along `axis`: |.|, Euclidean or operator norm depending on rank.
double shifted_sup(const PeriodicField& g, int axis, int off) {
  const int n = g.grid().n;
  double m = 0.0;
  const std::size_t nn = g.nodes();
  if (g.rank() == 0) {
    const double* d = g.comp(0);
    for (int iz = 0; iz < n; ++iz)
      for (int iy = 0; iy < n; ++iy)
        for (int ix = 0; ix < n; ++ix) {
          const int jx = axis == 0 ? (ix + off) % n : ix;
          const int jy = axis == 1 ? (iy + off) % n : iy;
          const int jz = axis == 2 ? (iz + off) % n : iz;
          const double diff = d[g.grid().index(ix, iy, iz)] - d[g.grid().index(jx, jy, jz)];
          m = std::max(m, std::abs(diff));
        }
    return m;
  }
  // vector / tensor: collect componentwise differences, norm pointwise
  std::vector<std::size_t> shift(nn);
  for (int iz = 0; iz < n; ++iz)
    for (int iy = 0; iy < n; ++iy)
      for (int ix = 0; ix < n; ++ix) {
        const int jx = axis == 0 ? (ix + off) % n : ix;
        const int jy = axis == 1 ? (iy + off) % n : iy;
        const int jz = axis == 2 ? (iz + off) % n : iz;
        shift[g.grid().index(ix, iy, iz)] = g.grid().index(jx, jy, jz);
      }
  if (g.rank() == 1) {
    const double *x = g.comp(0), *y = g.comp(1), *z = g.comp(2);
    for (std::size_t i = 0; i < nn; ++i) {
      const double dx = x[i] - x[shift[i]], dy = y[i] - y[shift[i]], dz = z[i] - z[shift[i]];
      m = std::max(m, dx * dx + dy * dy + dz * dz);
    }
    return std::sqrt(m);
  }
  for (std::size_t i = 0; i < nn; ++i) {
    Sym3 d;
    for (int c = 0; c < 6; ++c) d.v[c] = g.comp(c)[i] - g.comp(c)[shift[i]];
    m = std::max(m, sym3_opnorm(d));
  }
  return m;
}

}  // namespace

double holder_seminorm_int(const PeriodicField& f, int m) {
  if (m == 0) return f.sup_norm();
  Spectrum base = fft_forward(f);
  double best = 0.0;
  for (const auto& beta : multi_indices(m))
    best = std::max(best, derive(base, f, beta).sup_norm());
  return best;
}

double holder_norm_int(const PeriodicField& f, int m) {
  double v = 0.0;
  for (int j = 0; j <= m; ++j) v += holder_seminorm_int(f, j);
  return v;
}

HolderNormReport holder_norm(const PeriodicField& f, int order, double alpha) {
  if (alpha < 0.0 || alpha >= 1.0) throw InvalidInput("holder_norm: alpha in [0,1) expected");
  if (order + 1 > f.grid().nyquist())
    throw InvalidInput("holder_norm: order not resolvable at this grid");
  HolderNormReport rep;
  rep.order = order;
  rep.alpha = alpha;

  Spectrum base = fft_forward(f);
  for (int j = 0; j <= order; ++j) {
    double best = 0.0;
    if (j == 0) best = f.sup_norm();
    else
      for (const auto& beta : multi_indices(j))
        best = std::max(best, derive(base, f, beta).sup_norm());
    rep.integer_seminorms.push_back(best);
    rep.value += best;
  }

  if (alpha > 0.0) {
    const int n = f.grid().n;
    const double h = f.grid().spacing();
    for (int off = 1; off <= n / 2; off *= 2) rep.separations.push_back(off);
    double best = 0.0;
    for (const auto& beta : multi_indices(order)) {
      PeriodicField g = derive(base, f, beta);
      for (int axis = 0; axis < 3; ++axis)
        for (int off : rep.separations) {
          const double diff = shifted_sup(g, axis, off);
          best = std::max(best, diff / std::pow(off * h, alpha));
        }
    }
    rep.seminorm = best;
    rep.value += best;
  }
  return rep;
}

}  // namespace eci
