#include "eci/transport.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "eci/field_ops.hpp"
#include "eci/holder.hpp"
#include "eci/snapshot.hpp"

namespace eci {

VelocitySampler::VelocitySampler(const std::vector<PeriodicField>* slices, InterpParams interp)
    : slices_(slices), params_(interp) {
  if (slices_->empty()) throw InvalidInput("VelocitySampler: no slices");
  for (const auto& s : *slices_) {
    const double m = s.max_abs();
    if (m > 1e-14) zero_ = false;
    sup_ = std::max(sup_, s.sup_norm());
    band_ = std::max(band_, s.band());
    if (s.raw() != slices_->front().raw()) steady_ = false;
  }
  // pin a shared fine grid: behave as if every slice had the max band
  const int b = std::max(band_, 2);
  int m = next_fft_size(std::max(params_.min_grid, params_.oversample * b));
  m = std::min(m, std::max(params_.max_grid, slices_->front().grid().n));
  params_.min_grid = m;
  params_.max_grid = std::max(params_.max_grid, m);
}

VelocitySampler::InterpPtr VelocitySampler::interp_for(std::size_t i) const {
  if (steady_) i = 0;
  auto it = cache_.find(i);
  if (it == cache_.end()) {
    if (cache_.size() >= 4) cache_.erase(cache_.begin());
    it = cache_.emplace(i, std::make_shared<TrigInterpolator>((*slices_)[i], params_)).first;
  }
  return it->second;
}

void VelocitySampler::bracket(double t, InterpPtr* lo, InterpPtr* hi, double* theta) const {
  const auto& sl = *slices_;
  if (steady_ || sl.size() == 1) {
    *lo = *hi = interp_for(0);
    *theta = 0.0;
    return;
  }
  std::size_t h = 1;
  while (h + 1 < sl.size() && sl[h].time() < t) ++h;
  const std::size_t l = h - 1;
  const double t0 = sl[l].time(), t1 = sl[h].time();
  double th = (t1 > t0) ? (t - t0) / (t1 - t0) : 0.0;
  *theta = std::clamp(th, 0.0, 1.0);
  *lo = interp_for(l);
  *hi = interp_for(h);
}

void VelocitySampler::eval(double x, double y, double z, double t, double out[3]) const {
  InterpPtr lo, hi;
  double theta;
  bracket(t, &lo, &hi, &theta);
  if (lo == hi || theta == 0.0) {
    lo->eval(x, y, z, out);
    return;
  }
  if (theta == 1.0) {
    hi->eval(x, y, z, out);
    return;
  }
  double a[3], b[3];
  lo->eval(x, y, z, a);
  hi->eval(x, y, z, b);
  for (int c = 0; c < 3; ++c) out[c] = (1.0 - theta) * a[c] + theta * b[c];
}

namespace {

// Evaluation context at one fixed time: either a pinned slice context or a
// blended buffer (1-theta) a + theta b, built once and reused for all nodes.
class TimeLevelCtx {
 public:
  LagrangeCtx prepare(const VelocitySampler& vel, double t) {
    double theta;
    vel.bracket(t, &lo_, &hi_, &theta);
    if (lo_ == hi_ || theta <= 1e-14) return lo_->ctx();
    if (theta >= 1.0 - 1e-14) return hi_->ctx();
    const auto& a = lo_->fine_data();
    const auto& b = hi_->fine_data();
    buf_.resize(a.size());
    for (std::size_t i = 0; i < a.size(); ++i)
      buf_[i] = (1.0 - theta) * a[i] + theta * b[i];
    LagrangeCtx c = lo_->ctx();
    c.data = buf_.data();
    return c;
  }

 private:
  VelocitySampler::InterpPtr lo_, hi_;  // pins for the lifetime of the ctx
  std::vector<double> buf_;
};

void jacobian_and_deviation(FlowMap& fm, Grid3 g) {
  fm.jacobian_rows = jacobian_rows(fm.displacement);
  double dev = 0.0;
  const std::size_t nn = g.node_count();
  for (std::size_t i = 0; i < nn; ++i) {
    // operator norm of M = grad(displacement): sqrt(lambda_max(M M^T))
    double m[3][3];
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) m[r][c] = fm.jacobian_rows[std::size_t(r)].comp(c)[i];
    Sym3 mmt;
    for (int r = 0; r < 3; ++r)
      for (int c = r; c < 3; ++c)
        mmt.at(r, c) = m[r][0] * m[c][0] + m[r][1] * m[c][1] + m[r][2] * m[c][2];
    dev = std::max(dev, sym3_eigenvalues(mmt)[2]);
  }
  fm.max_deviation = std::sqrt(std::max(0.0, dev));
  for (int r = 0; r < 3; ++r) {
    double* d = fm.jacobian_rows[std::size_t(r)].comp(r);
    for (std::size_t i = 0; i < nn; ++i) d[i] += 1.0;
  }
  fm.cfl_flagged = fm.max_deviation > 1.0;
}

// RK4 over all nodes from time `from` to `to`; node positions in yx/yy/yz.
void integrate_nodes(const VelocitySampler& vel, double from, double to, double hmax,
                     std::vector<double>& yx, std::vector<double>& yy,
                     std::vector<double>& yz) {
  const double span = to - from;
  const int nsteps = std::max(1, int(std::ceil(std::abs(span) / hmax)));
  const double h = span / nsteps;
  if (span == 0.0) return;
  if (std::abs(h) < 1e-15) throw EciError("flow integration: step size underflow");
  TimeLevelCtx l1, l2, l3;
  double k1[3], k2[3], k3[3], k4[3];
  for (int step = 0; step < nsteps; ++step) {
    const double s = from + h * step;
    const LagrangeCtx c1 = l1.prepare(vel, s);
    const LagrangeCtx c2 = l2.prepare(vel, s + 0.5 * h);
    const LagrangeCtx c3 = l3.prepare(vel, s + h);
    for (std::size_t i = 0; i < yx.size(); ++i) {
      lagrange_eval(c1, yx[i], yy[i], yz[i], k1);
      lagrange_eval(c2, yx[i] + 0.5 * h * k1[0], yy[i] + 0.5 * h * k1[1],
                    yz[i] + 0.5 * h * k1[2], k2);
      lagrange_eval(c2, yx[i] + 0.5 * h * k2[0], yy[i] + 0.5 * h * k2[1],
                    yz[i] + 0.5 * h * k2[2], k3);
      lagrange_eval(c3, yx[i] + h * k3[0], yy[i] + h * k3[1], yz[i] + h * k3[2], k4);
      yx[i] += h / 6.0 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0]);
      yy[i] += h / 6.0 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1]);
      yz[i] += h / 6.0 * (k1[2] + 2 * k2[2] + 2 * k3[2] + k4[2]);
    }
  }
}

double step_cap(const VelocitySampler& vel, Grid3 g, int mu, const FlowSolveParams& p) {
  double hmax = 1.0 / (p.step_cap_mu_factor * mu);
  const double cfl = p.step_cap_cfl_factor * vel.sup_norm() * g.n / kTwoPi;
  if (cfl > 0.0) hmax = std::min(hmax, 1.0 / cfl);
  return hmax;
}

// The Gronwall chain closes under |grad f|_2 for scalars and |Dv|_op for the
// velocity (the per-axis max convention can lose a component-mixing factor),
// so the bounds are checked in exactly those norms.
double grad_sup(const PeriodicField& f) { return gradient(f).sup_norm(); }

double jac_opnorm_sup(const PeriodicField& v) {
  auto rows = jacobian_rows(v);
  double dev = 0.0;
  for (std::size_t i = 0; i < v.nodes(); ++i) {
    double m[3][3];
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) m[r][c] = rows[std::size_t(r)].comp(c)[i];
    Sym3 mmt;
    for (int r = 0; r < 3; ++r)
      for (int c = r; c < 3; ++c)
        mmt.at(r, c) = m[r][0] * m[c][0] + m[r][1] * m[c][1] + m[r][2] * m[c][2];
    dev = std::max(dev, sym3_eigenvalues(mmt)[2]);
  }
  return std::sqrt(std::max(0.0, dev));
}

}  // namespace

FlowMap solve_flow_map(const VelocitySampler& vel, Grid3 solve_grid, int l, int mu, double t,
                       const FlowSolveParams& params) {
  const double anchor = double(l) / mu;
  if (std::abs(t - anchor) > 1.0 / mu + 1e-12)
    throw InvalidInput("solve_flow_map: |t - l/mu| beyond the cutoff support");
  FlowMap fm;
  fm.anchor_time = anchor;
  fm.eval_time = t;
  fm.displacement = PeriodicField::vector(solve_grid, t);

  if (vel.zero() || t == anchor) {
    fm.displacement.set_band(0);
    jacobian_and_deviation(fm, solve_grid);
    return fm;
  }

  const int n = solve_grid.n;
  std::vector<double> yx(solve_grid.node_count()), yy(solve_grid.node_count()),
      yz(solve_grid.node_count());
  for (int iz = 0; iz < n; ++iz)
    for (int iy = 0; iy < n; ++iy)
      for (int ix = 0; ix < n; ++ix) {
        const std::size_t id = solve_grid.index(ix, iy, iz);
        yx[id] = solve_grid.coord(ix);
        yy[id] = solve_grid.coord(iy);
        yz[id] = solve_grid.coord(iz);
      }

  integrate_nodes(vel, t, anchor, step_cap(vel, solve_grid, mu, params), yx, yy, yz);

  for (int iz = 0; iz < n; ++iz)
    for (int iy = 0; iy < n; ++iy)
      for (int ix = 0; ix < n; ++ix) {
        const std::size_t id = solve_grid.index(ix, iy, iz);
        fm.displacement.comp(0)[id] = yx[id] - solve_grid.coord(ix);
        fm.displacement.comp(1)[id] = yy[id] - solve_grid.coord(iy);
        fm.displacement.comp(2)[id] = yz[id] - solve_grid.coord(iz);
      }
  fm.displacement.set_band(std::min(2 * vel.max_band() + 2, solve_grid.nyquist()));
  jacobian_and_deviation(fm, solve_grid);
  return fm;
}

PeriodicField transported_stress(const PeriodicField& stress_at_anchor, const FlowMap& flow,
                                 Grid3 out_grid, const InterpParams& interp) {
  if (stress_at_anchor.rank() != 2)
    throw InvalidInput("transported_stress: rank-2 input expected");
  PeriodicField out(out_grid, 2, flow.eval_time);
  if (flow.displacement.is_zero(1e-15) && stress_at_anchor.grid() == out_grid) {
    out = stress_at_anchor;
    out.set_time(flow.eval_time);
    return out;
  }
  TrigInterpolator si(stress_at_anchor, interp);
  const bool same_grid = flow.displacement.grid() == out_grid;
  PeriodicField disp = same_grid ? flow.displacement : regrid(flow.displacement, out_grid);
  const int n = out_grid.n;
  double vals[6];
  const LagrangeCtx ctx = si.ctx();
  for (int iz = 0; iz < n; ++iz)
    for (int iy = 0; iy < n; ++iy)
      for (int ix = 0; ix < n; ++ix) {
        const std::size_t id = out_grid.index(ix, iy, iz);
        lagrange_eval(ctx, out_grid.coord(ix) + disp.comp(0)[id],
                      out_grid.coord(iy) + disp.comp(1)[id],
                      out_grid.coord(iz) + disp.comp(2)[id], vals);
        for (int c = 0; c < 6; ++c) out.comp(c)[id] = vals[c];
      }
  out.set_band(std::min(stress_at_anchor.band() + disp.band(), out_grid.nyquist()));
  if (stress_at_anchor.trace_free()) out.remove_trace();
  return out;
}

void write_flow_snapshot(const std::filesystem::path& prefix, const FlowMap& flow) {
  const std::string base = prefix.string();
  write_snapshot(base + "_disp.field", flow.displacement, "flow_displacement");
  for (int r = 0; r < 3; ++r)
    write_snapshot(base + "_jac" + std::to_string(r) + ".field",
                   flow.jacobian_rows[std::size_t(r)], "flow_jacobian_row" + std::to_string(r));
}

TransportCheckReport verify_transport_estimates(const VelocitySampler& vel,
                                                const PeriodicField& f0,
                                                const PeriodicField& g, double t0,
                                                double horizon, int time_checks,
                                                const FlowSolveParams& params) {
  if (f0.rank() != 0 || g.rank() != 0)
    throw InvalidInput("verify_transport_estimates: scalar f0 and g expected");
  TransportCheckReport rep;
  const Grid3 grid = f0.grid();
  TrigInterpolator f0i(f0, params.interp);
  TrigInterpolator gi(g, params.interp);
  const LagrangeCtx gctx = gi.ctx();
  const LagrangeCtx f0ctx = f0i.ctx();

  double v1 = 0.0;
  for (const auto& s : vel.slices()) v1 = std::max(v1, jac_opnorm_sup(s));
  const double g_sup = g.sup_norm();
  const double g_1 = grad_sup(g);

  double hmax = horizon / std::max(8, time_checks * 2);
  if (!vel.zero())
    hmax = std::min(hmax,
                    1.0 / (params.step_cap_cfl_factor * vel.sup_norm() * grid.n / kTwoPi));

  const int n = grid.n;
  for (int chk = 1; chk <= time_checks; ++chk) {
    const double t = t0 + horizon * chk / time_checks;
    PeriodicField f(grid, 0, t);
    const int nst = std::max(1, int(std::ceil((t - t0) / hmax)));
    const double h = -(t - t0) / nst;
    double k1[3], k2[3], k3[3], k4[3];
    std::vector<LagrangeCtx> c1(nst), c2(nst), c3(nst);
    std::vector<TimeLevelCtx> holders(3 * std::size_t(nst));
    for (int st = 0; st < nst; ++st) {
      const double s = t + h * st;
      c1[st] = holders[3 * st + 0].prepare(vel, s);
      c2[st] = holders[3 * st + 1].prepare(vel, s + 0.5 * h);
      c3[st] = holders[3 * st + 2].prepare(vel, s + h);
    }
    for (int iz = 0; iz < n; ++iz)
      for (int iy = 0; iy < n; ++iy)
        for (int ix = 0; ix < n; ++ix) {
          double y[3] = {grid.coord(ix), grid.coord(iy), grid.coord(iz)};
          double acc = 0.0;
          for (int st = 0; st < nst; ++st) {
            lagrange_eval(c1[st], y[0], y[1], y[2], k1);
            double g1v;
            lagrange_eval(gctx, y[0], y[1], y[2], &g1v);
            lagrange_eval(c2[st], y[0] + 0.5 * h * k1[0], y[1] + 0.5 * h * k1[1],
                          y[2] + 0.5 * h * k1[2], k2);
            double g2v;
            lagrange_eval(gctx, y[0] + 0.5 * h * k1[0], y[1] + 0.5 * h * k1[1],
                          y[2] + 0.5 * h * k1[2], &g2v);
            lagrange_eval(c2[st], y[0] + 0.5 * h * k2[0], y[1] + 0.5 * h * k2[1],
                          y[2] + 0.5 * h * k2[2], k3);
            double g3v;
            lagrange_eval(gctx, y[0] + 0.5 * h * k2[0], y[1] + 0.5 * h * k2[1],
                          y[2] + 0.5 * h * k2[2], &g3v);
            lagrange_eval(c3[st], y[0] + h * k3[0], y[1] + h * k3[1], y[2] + h * k3[2], k4);
            double g4v;
            lagrange_eval(gctx, y[0] + h * k3[0], y[1] + h * k3[1], y[2] + h * k3[2], &g4v);
            for (int c = 0; c < 3; ++c)
              y[c] += h / 6.0 * (k1[c] + 2 * k2[c] + 2 * k3[c] + k4[c]);
            acc += h / 6.0 * (g1v + 2.0 * g2v + 2.0 * g3v + g4v);
          }
          double f0v;
          lagrange_eval(f0ctx, y[0], y[1], y[2], &f0v);
          // acc was integrated backward: f(x,t) = f0(Phi) + int_{t0}^{t} g
          f.at(0, ix, iy, iz) = f0v - acc;
        }

    TransportCheckRow row;
    row.t = t;
    row.f_sup = f.sup_norm();
    row.f_sup_bound = f0.sup_norm() + (t - t0) * g_sup;
    row.f_1 = grad_sup(f);
    const double e1 = std::exp((t - t0) * v1);
    row.f_1_bound =
        grad_sup(f0) * e1 + (v1 > 1e-14 ? g_1 * (e1 - 1.0) / v1 : g_1 * (t - t0));

    // flow-map deviation vs e^{(t-t0)[v]_1} - 1, anchor at t0
    FlowMap fm;
    fm.anchor_time = t0;
    fm.eval_time = t;
    fm.displacement = PeriodicField::vector(grid, t);
    if (!vel.zero()) {
      std::vector<double> yx(grid.node_count()), yy(grid.node_count()), yz(grid.node_count());
      for (int iz = 0; iz < n; ++iz)
        for (int iy = 0; iy < n; ++iy)
          for (int ix = 0; ix < n; ++ix) {
            const std::size_t id = grid.index(ix, iy, iz);
            yx[id] = grid.coord(ix);
            yy[id] = grid.coord(iy);
            yz[id] = grid.coord(iz);
          }
      integrate_nodes(vel, t, t0, hmax, yx, yy, yz);
      for (int iz = 0; iz < n; ++iz)
        for (int iy = 0; iy < n; ++iy)
          for (int ix = 0; ix < n; ++ix) {
            const std::size_t id = grid.index(ix, iy, iz);
            fm.displacement.comp(0)[id] = yx[id] - grid.coord(ix);
            fm.displacement.comp(1)[id] = yy[id] - grid.coord(iy);
            fm.displacement.comp(2)[id] = yz[id] - grid.coord(iz);
          }
    }
    jacobian_and_deviation(fm, grid);
    row.dphi_dev = fm.max_deviation;
    row.dphi_bound = std::exp((t - t0) * v1) - 1.0;

    if (row.f_sup > row.f_sup_bound + 1e-9 * std::max(1.0, row.f_sup_bound))
      rep.max_principle_ok = false;
    if (row.f_1 > row.f_1_bound + 1e-9 * std::max(1.0, row.f_1_bound)) rep.gronwall_ok = false;
    if (row.dphi_dev > row.dphi_bound + 1e-9) rep.dphi_ok = false;
    rep.rows.push_back(row);
  }
  return rep;
}

}  // namespace eci
