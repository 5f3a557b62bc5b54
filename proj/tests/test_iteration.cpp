#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "eci/calculus.hpp"
#include "eci/field_ops.hpp"
#include "eci/holder.hpp"
#include "eci/iteration.hpp"

using namespace eci;

namespace {

std::vector<double> uniform_times(int n) {
  std::vector<double> t;
  for (int j = 0; j <= n; ++j) t.push_back(double(j) / n);
  return t;
}

StepContext trivial_ctx(Grid3 g, int mu, long lambda1) {
  StepContext ctx;
  ctx.family = &standard_family();
  ctx.energy = EnergyProfile{};  // e = 1
  ctx.params.q = 0;
  ctx.params.delta_q = 1.0;
  ctx.params.delta_q1 = 1.0;
  ctx.params.delta_q2 = 0.25;
  ctx.params.lambda_q = 1.0;
  ctx.params.lambda_q1 = lambda1;
  ctx.params.mu = mu;
  ctx.params.ell = 1.0 / double(lambda1);
  ctx.output_grid = g;
  ctx.flow_interp.points = 8;
  ctx.flow_interp.oversample = 12;
  return ctx;
}

StepContext seeded_ctx(Grid3 g, int mu, long lambda1, const SeededStateSpec& spec) {
  StepContext ctx = trivial_ctx(g, mu, lambda1);
  ctx.params.delta_q1 = 0.5;
  ctx.params.delta_q2 = 0.25;
  ctx.energy = seeded_energy_profile(g, spec, ctx.params.delta_q1);
  return ctx;
}

}  // namespace

TEST_CASE("cutoff family: partition of unity and support") {
  CutoffFamily cf(8);
  CHECK(cf.partition_residual() <= 1e-12);
  CHECK(CutoffFamily::chi(0.0) == 1.0);
  CHECK(CutoffFamily::chi(0.76) == 0.0);
  CHECK(CutoffFamily::chi(-0.76) == 0.0);
  for (double t : {0.0, 0.1, 0.33, 0.5, 0.99, 1.0}) {
    auto act = cf.active(t);
    CHECK(act.size() >= 1);
    CHECK(act.size() <= 2);
    for (int l : act) {
      CHECK(l >= 0);
      CHECK(l <= 8);
    }
  }
}

TEST_CASE("cutoff derivatives match finite differences") {
  const double h = 1e-6;
  for (double u : {-0.6, -0.3, 0.05, 0.26, 0.41, 0.62, 0.7}) {
    const double fd1 = (CutoffFamily::chi(u + h) - CutoffFamily::chi(u - h)) / (2 * h);
    CHECK(CutoffFamily::chi_d1(u) == doctest::Approx(fd1).epsilon(1e-6));
    const double fd2 =
        (CutoffFamily::chi(u + h) - 2 * CutoffFamily::chi(u) + CutoffFamily::chi(u - h)) /
        (h * h);
    CHECK(CutoffFamily::chi_d2(u) == doctest::Approx(fd2).epsilon(1e-4).scale(100.0));
  }
}

TEST_CASE("strict schedule: formulas and admissibility structure") {
  ParamSchedule s = ParamSchedule::strict(4.0, 1.5, 2.6, 0.05, 2);
  CHECK(s.beta() == doctest::Approx(0.5 / 12.5));
  CHECK(s.delta(0) == doctest::Approx(0.25));  // a^{-b^0} = 1/a
  CHECK(s.delta(1) == doctest::Approx(std::pow(4.0, -1.5)));
  CHECK(s.delta(2) == doctest::Approx(std::pow(4.0, -2.25)));
  const double lo = std::pow(4.0, 2.6 * 1.5);
  CHECK(s.lambda(0) == doctest::Approx(std::ceil(lo)));
  auto p = s.stage(0);
  CHECK(p.mu >= 1);
  CHECK(p.ell > 0.0);
  auto checks = s.check_stage(0);
  CHECK(checks.size() == 10);
}

TEST_CASE("relaxed schedule: acceptance ladder and geometric extension") {
  ParamSchedule s = ParamSchedule::relaxed({1.0, 0.25}, {6, 24}, {8, 8}, {1.0 / 6, 1.0 / 12}, 2);
  auto p0 = s.stage(0);
  CHECK(p0.delta_q1 == 1.0);
  CHECK(p0.delta_q2 == 0.25);
  CHECK(p0.lambda_q1 == 6);
  CHECK(p0.mu == 8);
  auto p1 = s.stage(1);
  CHECK(p1.delta_q == 1.0);
  CHECK(p1.delta_q1 == 0.25);
  CHECK(p1.delta_q2 == doctest::Approx(0.0625));  // geometric extension
  CHECK(p1.lambda_q1 == 24);
}

TEST_CASE("energy gap: zero field with constant profile") {
  Grid3 g(16);
  PeriodicField v = PeriodicField::vector(g);
  v.set_band(0);
  EnergyProfile e;
  e.c0 = 2.0;
  const double rho = energy_gap(e, v, 0.3, 0.25);
  CHECK(rho == doctest::Approx(2.0 * 0.75 / (3.0 * std::pow(kTwoPi, 3))).epsilon(1e-14));
  EnergyProfile tiny;
  tiny.c0 = 1e-9;
  PeriodicField big = PeriodicField::vector(g);
  big.fill(1.0);
  big.set_band(0);
  CHECK_THROWS_AS(energy_gap(tiny, big, 0.0, 0.25), EnergyGapError);
}

TEST_CASE("energy gap quadrature matches a doubled-resolution oracle") {
  Grid3 g(32);
  SeededStateSpec spec;
  auto st = make_seeded_state(g, {0.0, 0.5, 1.0}, spec);
  EnergyProfile e = seeded_energy_profile(g, spec, 0.5);
  const double rho = energy_gap(e, st.slices[1].v, 0.5, 0.25);
  PeriodicField vfine = regrid(st.slices[1].v, Grid3(64));
  const double rho_fine = energy_gap(e, vfine, 0.5, 0.25);
  CHECK(rho == doctest::Approx(rho_fine).epsilon(1e-10));
}

TEST_CASE("seeded state solves Euler-Reynolds and meets the energy hypothesis") {
  Grid3 g(32);
  SeededStateSpec spec;
  auto st = make_seeded_state(g, uniform_times(32), spec);
  auto rep = st.check_invariants();
  CHECK(rep.max_div_v_rel <= 1e-11);
  CHECK(rep.max_trace_rel <= 1e-12);
  CHECK(rep.residual <= st.residual_tol);
  EnergyProfile e = seeded_energy_profile(g, spec, 0.5);
  for (const auto& sl : st.slices) {
    const double gap = std::abs(e(sl.t) * (1.0 - 0.5) - integral_square(sl.v));
    CHECK(gap <= 0.25 * 0.5 * e(sl.t));
  }
}

TEST_CASE("trivial state step: every degenerate branch of the construction") {
  Grid3 g(32);
  const int mu = 4;
  auto state0 = EulerReynoldsState::zero(g, uniform_times(8 * mu));
  StepContext ctx = trivial_ctx(g, mu, 3);
  StepExecutor ex(state0, ctx);

  const double t = 0.375;  // exactly at an anchor: single active cutoff
  auto pert = ex.perturbation(t);

  for (const auto& f : pert.flows) CHECK(f.displacement.sup_norm() <= 1e-14);
  CHECK(pert.wc.sup_norm() <= 1e-13 * pert.wo.sup_norm());
  for (const auto& amps_l : pert.amps)
    for (const auto& a : amps_l) {
      const double lo = a.comp(0)[0];
      double dev = 0.0;
      for (std::size_t i = 0; i < a.nodes(); ++i)
        dev = std::max(dev, std::abs(a.comp(0)[i] - lo));
      CHECK(dev <= 1e-13 * std::abs(lo));
    }

  CHECK(pert.wo.sup_norm() <= 0.5 * ex.constants().M * std::sqrt(ctx.params.delta_q1));
  CHECK(ex.doublesum_residual(t, pert) <= 1e-10 * ctx.params.delta_q1);

  auto sa = ex.new_stress(t, pert);
  CHECK(sa.comp[2].max_abs() <= 1e-13);
  CHECK(sa.comp[3].max_abs() <= 1e-13);
  CHECK(sa.comp[4].max_abs() <= 1e-14);
  CHECK(sa.comp[5].max_abs() <= 1e-14);
  CHECK(sa.R1.max_trace() <= 1e-12 * std::max(1.0, sa.R1.max_abs()));
  {
    PeriodicField expect = dot_vv(pert.wo, pert.wo);
    expect *= -0.5;
    const double mean = expect.mean();
    for (std::size_t i = 0; i < expect.nodes(); ++i) expect.comp(0)[i] -= mean;
    expect -= sa.p1;
    CHECK(expect.sup_norm() <= 1e-12);
  }
  const double v1n = sa.v1.sup_norm() + holder_seminorm_int(sa.v1, 1);
  CHECK(divergence(sa.v1).sup_norm() <= 1e-10 * v1n);
  CHECK(sa.residual_rhs_analytic.sup_norm() <= 1e-10);
  CHECK(ex.oscillation_cancellation_residual(t, pert) <= 1e-10);
}

TEST_CASE("trivial state full step: energy tracking and determinism") {
  Grid3 g(32);
  const int mu = 4;
  auto state0 = EulerReynoldsState::zero(g, uniform_times(8 * mu));
  StepContext ctx = trivial_ctx(g, mu, 3);
  auto res1 = run_step(state0, ctx, true);
  auto res2 = run_step(state0, ctx, false);
  // identical rows modulo runtime header
  const std::string c1 = res1.diagnostics.csv();
  const std::string c2 = res2.diagnostics.csv();
  CHECK(c1.substr(c1.find("\nq,")) == c2.substr(c2.find("\nq,")));

  REQUIRE(res1.next_state.has_value());
  const auto& ns = *res1.next_state;
  CHECK(ns.stage == 1);
  CHECK(ns.slices.size() == state0.slices.size());
  for (const auto& row : res1.diagnostics.rows) {
    CHECK(std::abs(row[23] - row[22]) <= 1e-10 * row[22]);  // int_wo_sq vs ebar
    CHECK(row[13] <= 1e-10);                                 // div_v1_rel
    CHECK(row[12] <= 1e-11);                                 // trace
    CHECK(row[2] <= 1e-13 * std::max(1.0, row[1]));          // wc_sup
  }
}

TEST_CASE("seeded state step: full algebra across a non-trivial flow") {
  Grid3 g(48);
  const int mu = 4;
  SeededStateSpec spec;
  auto state0 = make_seeded_state(g, uniform_times(8 * mu), spec);
  StepContext ctx = seeded_ctx(g, mu, 3, spec);
  StepExecutor ex(state0, ctx);

  const double t = 0.34375;  // generic point, two active cutoffs
  auto pert = ex.perturbation(t);
  CHECK(pert.wc.sup_norm() > 1e-6);

  CHECK(ex.doublesum_residual(t, pert) <= 1e-10 * ctx.params.delta_q1);

  auto sa = ex.new_stress(t, pert);
  const double osc = ex.oscillation_cancellation_residual(t, pert);
  MESSAGE("oscillation-cancellation residual ", osc, " vs R1 component ", sa.comp[1].sup_norm());
  CHECK(osc <= 1e-6);

  PeriodicField w = pert.wo;
  w += pert.wc;
  const double wn1 = w.sup_norm() + holder_seminorm_int(w, 1);
  MESSAGE("div w relative: ", divergence(w).sup_norm() / wn1);
  CHECK(divergence(w).sup_norm() <= 1e-8 * wn1);

  CHECK(sa.residual_rhs_analytic.sup_norm() <= 2e-4);

  CHECK(sa.comp[3].max_abs() > 0.0);
  CHECK(sa.comp[4].max_abs() > 0.0);
  CHECK(sa.comp[5].max_abs() > 0.0);
  CHECK(sa.R1.max_trace() <= 1e-11 * std::max(1.0, sa.R1.max_abs()));
}

TEST_CASE("analytic D_t w matches centered differences at second order") {
  Grid3 g(32);
  const int mu = 4;
  SeededStateSpec spec;
  const double t0 = 0.375;
  std::vector<double> times;
  for (int l = 0; l <= mu; ++l) times.push_back(double(l) / mu);
  const double h1 = 1.0 / 256, h2 = 1.0 / 512;
  times.push_back(t0);
  for (double d : {-h1, -h2, h2, h1}) times.push_back(t0 + d);
  std::sort(times.begin(), times.end());
  auto state0 = make_seeded_state(g, times, spec);
  StepContext ctx = seeded_ctx(g, mu, 3, spec);
  StepExecutor ex(state0, ctx);

  auto center = ex.perturbation(t0);
  PeriodicField wC = center.wo;
  wC += center.wc;
  Mollifier mol(ctx.params.ell);
  PeriodicField vell = mollify(state0.at_time(t0).v, mol);

  auto fd_error = [&](double h) {
    auto plus = ex.perturbation(t0 + h);
    auto minus = ex.perturbation(t0 - h);
    PeriodicField wfd = plus.wo;
    wfd += plus.wc;
    PeriodicField wm = minus.wo;
    wm += minus.wc;
    wfd -= wm;
    wfd *= 1.0 / (2.0 * h);
    PeriodicField gradterm(g, 1, t0);
    PeriodicField scal(g, 0);
    for (int c = 0; c < 3; ++c) {
      std::copy(wC.comp(c), wC.comp(c) + wC.nodes(), scal.comp(0));
      scal.set_band(wC.band());
      PeriodicField gr = gradient(scal);
      const double *g0 = gr.comp(0), *g1 = gr.comp(1), *g2 = gr.comp(2);
      const double *v0 = vell.comp(0), *v1 = vell.comp(1), *v2 = vell.comp(2);
      double* o = gradterm.comp(c);
      for (std::size_t i = 0; i < wC.nodes(); ++i)
        o[i] = v0[i] * g0[i] + v1[i] * g1[i] + v2[i] * g2[i];
    }
    wfd += gradterm;
    wfd -= center.dtw_analytic;
    return wfd.sup_norm();
  };

  const double e1 = fd_error(h1);
  const double e2 = fd_error(h2);
  const double order = std::log2(e1 / e2);
  MESSAGE("D_t w FD agreement errors ", e1, " ", e2, " order ", order);
  CHECK(order >= 1.9);
}

TEST_CASE("constants: e = 1 formulas and homogeneity under doubling e") {
  const auto& fam = standard_family();
  EnergyProfile e1;  // e = 1
  std::vector<double> rhos = {0.75 / (3.0 * std::pow(kTwoPi, 3))};
  auto c1 = compute_constants(e1, fam, rhos, 1.0);
  CHECK(c1.eta == doctest::Approx(c1.r0 / (4.0 * c1.C0)));
  CHECK(c1.M == doctest::Approx(2.0 * c1.C0 * 24.0));

  EnergyProfile e2;
  e2.c0 = 2.0;
  std::vector<double> rhos2 = {2.0 * 0.75 / (3.0 * std::pow(kTwoPi, 3))};
  auto c2 = compute_constants(e2, fam, rhos2, 1.0);
  CHECK(c2.M == doctest::Approx(2.0 * c1.M).epsilon(1e-12));
  CHECK(c2.eta == doctest::Approx(2.0 * c1.eta).epsilon(1e-12));
}

TEST_CASE("corrector ratio falls as lambda_{q+1} grows, other parameters held") {
  Grid3 g(48);
  const int mu = 4;
  SeededStateSpec spec;
  auto state0 = make_seeded_state(g, uniform_times(8 * mu), spec);
  const double t = 0.34375;
  double prev = -1.0;
  int decreases = 0, total = 0;
  for (long lam : {3, 6, 9}) {
    StepContext ctx = seeded_ctx(g, mu, lam, spec);
    StepExecutor ex(state0, ctx);
    auto pert = ex.perturbation(t);
    const double ratio = pert.wc.sup_norm() / pert.wo.sup_norm();
    MESSAGE("lambda1 = ", lam, " corrector ratio = ", ratio);
    if (prev > 0) {
      ++total;
      if (ratio <= prev * 1.05) ++decreases;
    }
    prev = ratio;
  }
  CHECK(decreases == total);
}
