#include "eci/sweeps.hpp"

#include <cmath>
#include <complex>
#include <cstdio>

#include "eci/calculus.hpp"
#include "eci/field_ops.hpp"
#include "eci/holder.hpp"

namespace eci {

namespace {

// 2 Re(a e^{i lambda k.x}) for scalar or vector amplitude a.
PeriodicField modulated(const PeriodicField& a, Ivec3 k, int lambda) {
  const Grid3 g = a.grid();
  PeriodicField out(g, a.rank(), a.time());
  const int n = g.n;
  std::vector<double> cx(n), sx(n), cy(n), sy(n), cz(n), sz(n);
  for (int i = 0; i < n; ++i) {
    cx[i] = std::cos(lambda * k[0] * g.coord(i));
    sx[i] = std::sin(lambda * k[0] * g.coord(i));
    cy[i] = std::cos(lambda * k[1] * g.coord(i));
    sy[i] = std::sin(lambda * k[1] * g.coord(i));
    cz[i] = std::cos(lambda * k[2] * g.coord(i));
    sz[i] = std::sin(lambda * k[2] * g.coord(i));
  }
  for (int c = 0; c < a.ncomp(); ++c) {
    const double* src = a.comp(c);
    double* dst = out.comp(c);
    for (int iz = 0; iz < n; ++iz)
      for (int iy = 0; iy < n; ++iy) {
        const double cyz = cy[iy] * cz[iz] - sy[iy] * sz[iz];
        const double syz = sy[iy] * cz[iz] + cy[iy] * sz[iz];
        const std::size_t o = g.index(0, iy, iz);
        for (int ix = 0; ix < n; ++ix) {
          const double cc = cx[ix] * cyz - sx[ix] * syz;  // cos(lambda k.x)
          dst[o + ix] = 2.0 * src[o + ix] * cc;
        }
      }
  }
  const int kmax = std::max({std::abs(k[0]), std::abs(k[1]), std::abs(k[2])});
  out.set_band(std::min(a.band() + lambda * kmax, g.nyquist()));
  return out;
}

int carrier_band(Ivec3 k, int lambda) {
  return lambda * std::max({std::abs(k[0]), std::abs(k[1]), std::abs(k[2])});
}

}  // namespace

double fit_loglog_order(const std::vector<DecayRow>& rows, double floor_value) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int m = 0;
  for (const auto& r : rows) {
    if (r.value <= floor_value || r.sweep <= 0.0) continue;
    const double x = std::log(r.sweep), y = std::log(r.value);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++m;
  }
  if (m < 2) return 0.0;
  return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

std::string DecayReport::csv() const {
  std::string out = "# eci-sweep v1, check=" + check +
                    ", fitted_order=" + std::to_string(order) +
                    ", decay_order=" + std::to_string(decay_order) +
                    (truncated ? ", truncated=1" : ", truncated=0") + "\n";
  out += "sweep,value\n";
  char buf[80];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", r.sweep, r.value);
    out += buf;
  }
  return out;
}

DecayReport stationary_phase_integral_decay(const PeriodicField& a, Ivec3 k,
                                            const std::vector<int>& lambdas) {
  if (a.rank() != 0) throw InvalidInput("stationary_phase_integral_decay: scalar a expected");
  if (k[0] == 0 && k[1] == 0 && k[2] == 0)
    throw InvalidInput("stationary_phase_integral_decay: k must be nonzero");
  DecayReport rep;
  rep.check = "stationary-phase";
  const Grid3 g = a.grid();
  const int n = g.n;
  for (int lambda : lambdas) {
    if (a.band() + carrier_band(k, lambda) >= g.nyquist()) {
      rep.truncated = true;
      break;
    }
    // average of a e^{i lambda k.x}: exact given the band check above
    std::complex<double> acc = 0.0;
    const double* d = a.comp(0);
    for (int iz = 0; iz < n; ++iz)
      for (int iy = 0; iy < n; ++iy) {
        const std::size_t o = g.index(0, iy, iz);
        const double pyz = lambda * (k[1] * g.coord(iy) + k[2] * g.coord(iz));
        for (int ix = 0; ix < n; ++ix) {
          const double ph = lambda * k[0] * g.coord(ix) + pyz;
          acc += d[o + ix] * std::complex<double>(std::cos(ph), std::sin(ph));
        }
      }
    acc /= double(g.node_count());
    rep.rows.push_back({double(lambda), std::abs(acc)});
  }
  rep.order = fit_loglog_order(rep.rows, 1e-15 * std::max(1.0, a.sup_norm()));
  rep.decay_order = -rep.order;
  return rep;
}

DecayReport stationary_phase_r_decay(const PeriodicField& a, Ivec3 k,
                                     const std::vector<int>& lambdas, double alpha) {
  if (a.rank() != 1) throw InvalidInput("stationary_phase_r_decay: vector a expected");
  DecayReport rep;
  rep.check = "stationary-phase-R";
  for (int lambda : lambdas) {
    if (a.band() + carrier_band(k, lambda) >= a.grid().nyquist()) {
      rep.truncated = true;
      break;
    }
    PeriodicField F = modulated(a, k, lambda);
    PeriodicField rv = inverse_divergence(F);
    rep.rows.push_back({double(lambda), holder_norm(rv, 0, alpha).value});
  }
  rep.order = fit_loglog_order(rep.rows);
  rep.decay_order = -rep.order;
  return rep;
}

DecayReport br_commutator_decay(const PeriodicField& b, const PeriodicField& a, Ivec3 k,
                                const std::vector<int>& lambdas, double alpha) {
  if (b.rank() != 0 || a.rank() != 1)
    throw InvalidInput("br_commutator_decay: scalar b and vector a expected");
  DecayReport rep;
  rep.check = "br-commutator";
  for (int lambda : lambdas) {
    if (a.band() + b.band() + carrier_band(k, lambda) >= a.grid().nyquist()) {
      rep.truncated = true;
      break;
    }
    PeriodicField F = modulated(a, k, lambda);
    PeriodicField bF = mult_sv(b, F);
    PeriodicField r_bF = inverse_divergence(bF);
    PeriodicField rF = inverse_divergence(F);
    // b * R(F), componentwise de-aliased
    PeriodicField brF(b.grid(), 2, b.time());
    {
      PeriodicField scal(b.grid(), 0);
      for (int c = 0; c < 6; ++c) {
        std::copy(rF.comp(c), rF.comp(c) + rF.nodes(), scal.comp(0));
        scal.set_band(rF.band());
        PeriodicField prod = mult_ss(b, scal);
        std::copy(prod.comp(0), prod.comp(0) + prod.nodes(), brF.comp(c));
      }
    }
    r_bF -= brF;
    rep.rows.push_back({double(lambda), holder_norm(r_bF, 0, alpha).value});
  }
  rep.order = fit_loglog_order(rep.rows);
  rep.decay_order = -rep.order;
  return rep;
}

DecayReport cet_defect_sweep(const PeriodicField& f, const PeriodicField& g,
                             const std::vector<double>& ells) {
  DecayReport rep;
  rep.check = "cet";
  for (double ell : ells) {
    // kernels below one grid cell are a warning, not a stop: the spectral
    // multiplier stays exact for band-limited data
    Mollifier m(ell);
    PeriodicField defect = cet_commutator_defect(f, g, m);
    rep.rows.push_back({ell, defect.sup_norm()});
  }
  rep.order = fit_loglog_order(rep.rows);
  rep.decay_order = rep.order;  // defect shrinks as ell^order with order > 0
  return rep;
}

}  // namespace eci
