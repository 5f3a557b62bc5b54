#include "eci/verify.hpp"

#include <cmath>
#include <cstdio>
#include <random>

#include <json.hpp>

#include "eci/calculus.hpp"
#include "eci/field_ops.hpp"
#include "eci/holder.hpp"
#include "eci/iteration.hpp"
#include "eci/random_fields.hpp"
#include "eci/sweeps.hpp"
#include "eci/transport.hpp"

namespace eci {

namespace {

using Results = std::vector<PropertyResult>;

void add(Results& r, const std::string& suite, const std::string& prop, double measured,
         double threshold, bool below = true) {
  PropertyResult p;
  p.suite = suite;
  p.property = prop;
  p.measured = measured;
  p.threshold = threshold;
  p.pass = below ? (measured <= threshold) : (measured >= threshold);
  r.push_back(p);
}

Results fields_suite(std::uint64_t seed) {
  Results r;
  RandomFieldGen gen(seed);
  Grid3 g(32);

  {
    PeriodicField f = gen.scalar(g, 8);
    Spectrum s = fft_forward(f);
    PeriodicField back(g, 0);
    fft_inverse(s, back);
    back -= f;
    add(r, "fields", "transform_round_trip_rel", back.max_abs() / f.sup_norm(), 1e-12);
  }
  {
    PeriodicField f = gen.scalar(g, 10);
    PeriodicField v = gen.vector(g, 10);
    PeriodicField lhs = divergence(mult_sv(f, v));
    PeriodicField rhs = mult_ss(f, divergence(v));
    rhs += dot_vv(gradient(f), v);
    lhs -= rhs;
    add(r, "fields", "leibniz_rel", lhs.sup_norm() / std::max(1.0, rhs.sup_norm()), 1e-10);
  }
  {
    PeriodicField f = gen.scalar(Grid3(16), 5);
    const double coarse = holder_norm(f, 0, 0.5).seminorm;
    const double fine = holder_norm(regrid(f, Grid3(32)), 0, 0.5).seminorm;
    add(r, "fields", "holder_refinement_monotone", coarse - fine, 1e-12);
  }
  {
    int violations = 0;
    for (int i = 0; i < 50; ++i) {
      PeriodicField f = gen.scalar(g, 6);
      const double f0 = f.sup_norm();
      const double f1 = holder_seminorm_int(f, 1);
      const double f2 = holder_seminorm_int(f, 2);
      if (f1 > 2.0 * std::sqrt(f0 * f2)) ++violations;
    }
    add(r, "fields", "interpolation_inequality_violations", violations, 0.0);
  }
  return r;
}

Results beltrami_suite(std::uint64_t seed) {
  Results r;
  Grid3 g(48);
  const auto& fam = standard_family();
  auto all = sphere_frequencies(5);
  auto modes = build_modes(5, all);
  RandomFieldGen gen(seed);
  // conjugate-symmetric amplitudes from the seeded generator
  std::vector<std::complex<double>> amps(modes.size());
  {
    std::mt19937_64 rng(seed + 7);
    std::normal_distribution<double> d(0.0, 1.0);
    for (std::size_t i = 0; i < modes.size(); ++i) amps[i] = {d(rng), d(rng)};
    for (std::size_t i = 0; i < modes.size(); ++i)
      for (std::size_t j = i + 1; j < modes.size(); ++j)
        if (modes[j].k[0] == -modes[i].k[0] && modes[j].k[1] == -modes[i].k[1] &&
            modes[j].k[2] == -modes[i].k[2])
          amps[j] = std::conj(amps[i]);
  }
  PeriodicField w = evaluate_beltrami(modes, amps, g, 3);
  add(r, "beltrami", "div_W_rel", divergence(w).sup_norm() / w.sup_norm(), 1e-12);
  {
    PeriodicField ww = outer_sym(w, w);
    PeriodicField lhs = divergence(ww);
    PeriodicField w2 = dot_vv(w, w);
    PeriodicField rhs = gradient(w2);
    rhs *= 0.5;
    lhs -= rhs;
    add(r, "beltrami", "self_interaction_gradient_rel",
        lhs.sup_norm() / (w.sup_norm() * w.sup_norm()), 1e-10);
    const auto means = component_means(ww);
    const Sym3 pred = beltrami_mean_outer(modes, amps);
    double worst = 0.0;
    for (int c = 0; c < 6; ++c) worst = std::max(worst, std::abs(means[std::size_t(c)] - pred.v[c]));
    add(r, "beltrami", "mean_outer_identity", worst, 1e-12);
  }
  add(r, "beltrami", "bk_identity", check_bk_identity(modes), 1e-12);
  add(r, "beltrami", "family_disjoint",
      double([&] {
        int shared = 0;
        for (const auto& k : fam.family.even_set)
          for (const auto& k2 : fam.family.odd_set)
            if (k == k2) ++shared;
        return shared;
      }()),
      0.0);
  return r;
}

Results geometry_suite(std::uint64_t seed) {
  Results r;
  const auto& fam = standard_family();
  for (const GammaSolver* solver : {&fam.even_solver, &fam.odd_solver}) {
    const std::string tag = solver == &fam.even_solver ? "even" : "odd";
    add(r, "geometry", "r0_" + tag, solver->r0(), 0.01, /*below=*/false);
    std::mt19937_64 rng(seed + (tag == "even" ? 0 : 1));
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    double worst_recon = 0.0, worst_trace = 0.0, worst_lip = 0.0;
    for (int i = 0; i < 100; ++i) {
      Sym3 e;
      for (int c = 0; c < 6; ++c) e.v[c] = u(rng);
      const double nrm = sym3_opnorm(e);
      Sym3 R = Sym3::identity();
      for (int c = 0; c < 6; ++c) R.v[c] += e.v[c] * (solver->r0() / nrm) * 0.999;
      worst_recon = std::max(worst_recon, solver->reconstruction_residual(R));
      const auto cvals = solver->coefficients(R);
      double sum = 0.0;
      for (double x : cvals) sum += 2.0 * x;
      worst_trace = std::max(worst_trace, std::abs(sum - R.trace()));
      const auto gv = solver->gamma(R);
      const auto g0 = solver->gamma(Sym3::identity());
      for (std::size_t p = 0; p < gv.size(); ++p) {
        const double L = solver->linear_norm_estimate(p) / (2.0 * std::sqrt(solver->m0()));
        const double dist = sym3_opnorm(R - Sym3::identity());
        const double excess = std::abs(gv[p] - g0[p]) - L * dist * 1.0001;
        worst_lip = std::max(worst_lip, excess);
      }
    }
    add(r, "geometry", "reconstruction_" + tag, worst_recon, 1e-12);
    add(r, "geometry", "trace_identity_" + tag, worst_trace, 1e-11);
    add(r, "geometry", "lipschitz_excess_" + tag, worst_lip, 1e-13);
  }
  return r;
}

Results calculus_suite(std::uint64_t seed) {
  Results r;
  RandomFieldGen gen(seed);
  Grid3 g(64);
  {
    double worst_div = 0.0, worst_trace = 0.0;
    for (int i = 0; i < 5; ++i) {
      PeriodicField v = gen.vector(Grid3(32), 9);
      PeriodicField rv = inverse_divergence(v);
      worst_trace = std::max(worst_trace, rv.max_trace() / std::max(1.0, rv.max_abs()));
      PeriodicField d = divergence(rv);
      for (int c = 0; c < 3; ++c) {
        const double mc = v.mean(c);
        const double* dv = d.comp(c);
        const double* vv = v.comp(c);
        for (std::size_t m = 0; m < v.nodes(); ++m)
          worst_div = std::max(worst_div, std::abs(dv[m] - (vv[m] - mc)));
      }
    }
    add(r, "calculus", "div_R_identity", worst_div, 1e-11);
    add(r, "calculus", "R_trace_free", worst_trace, 1e-12);
  }
  {
    PeriodicField u = gen.vector(Grid3(32), 8, 1.0, true);
    PeriodicField pu = leray_project(u);
    pu -= u;
    add(r, "calculus", "leray_divfree_identity", pu.sup_norm() / u.sup_norm(), 1e-12);
    PeriodicField wv = gen.vector(Grid3(32), 8);
    PeriodicField p1 = leray_project(wv);
    PeriodicField p2 = leray_project(p1);
    p2 -= p1;
    add(r, "calculus", "leray_idempotent", p2.sup_norm() / std::max(1.0, wv.sup_norm()), 1e-12);
  }
  {
    PeriodicField f = gen.scalar(Grid3(32), 8);
    Mollifier m(0.25);
    PeriodicField a = spectral_derivative(mollify(f, m), 1);
    PeriodicField b = mollify(spectral_derivative(f, 1), m);
    a -= b;
    add(r, "calculus", "mollify_derivative_commute", a.sup_norm() / std::max(1.0, b.sup_norm()),
        1e-11);
  }
  {
    PeriodicField f = gen.scalar(g, 5);
    PeriodicField h = gen.scalar(g, 5);
    DecayReport rep = cet_defect_sweep(f, h, {1.0 / 8, 1.0 / 16, 1.0 / 32, 1.0 / 64});
    add(r, "calculus", "cet_fitted_order", rep.decay_order, 1.9, /*below=*/false);
    PeriodicField c(g, 0);
    c.fill(1.3);
    c.set_band(0);
    add(r, "calculus", "cet_constant_zero",
        cet_commutator_defect(f, c, Mollifier(0.25)).sup_norm(), 1e-13);
  }
  {
    double worst = 0.0;
    for (int i = 0; i < 20; ++i) {
      PeriodicField v = gen.vector(Grid3(32), 8);
      worst = std::max(worst, almost_inverse_defect(v) / std::max(1.0, v.sup_norm()));
    }
    add(r, "calculus", "almost_inverse_identity", worst, 1e-11);
  }
  {
    PeriodicField a = PeriodicField::scalar(g);
    for (int iz = 0; iz < g.n; ++iz)
      for (int iy = 0; iy < g.n; ++iy)
        for (int ix = 0; ix < g.n; ++ix)
          a.at(0, ix, iy, iz) = std::exp(std::sin(g.coord(ix)));
    a.set_band(14);
    auto rep = stationary_phase_integral_decay(a, {1, 0, 0}, {2, 4, 8, 16});
    add(r, "calculus", "stationary_phase_integral_order", rep.decay_order, 2.9, false);
  }
  {
    PeriodicField a = PeriodicField::vector(g);
    for (int iz = 0; iz < g.n; ++iz)
      for (int iy = 0; iy < g.n; ++iy)
        for (int ix = 0; ix < g.n; ++ix) {
          a.at(0, ix, iy, iz) = 2.0 + std::sin(g.coord(iy));
          a.at(1, ix, iy, iz) = 1.0 + 0.5 * std::cos(g.coord(iz));
          a.at(2, ix, iy, iz) = std::sin(g.coord(iy)) * std::cos(g.coord(iz));
        }
    a.set_band(2);
    auto rep = stationary_phase_r_decay(a, {1, 0, 0}, {2, 4, 8, 16}, 0.25);
    add(r, "calculus", "stationary_phase_R_order", rep.decay_order, 1.0 - 0.25 - 0.1, false);

    PeriodicField b = PeriodicField::scalar(g);
    for (int iz = 0; iz < g.n; ++iz)
      for (int iy = 0; iy < g.n; ++iy)
        for (int ix = 0; ix < g.n; ++ix) b.at(0, ix, iy, iz) = std::sin(g.coord(iy));
    b.set_band(1);
    PeriodicField e1 = PeriodicField::vector(g);
    std::fill(e1.comp(0), e1.comp(0) + e1.nodes(), 1.0);
    e1.set_band(0);
    auto rep2 = br_commutator_decay(b, e1, {1, 0, 0}, {2, 4, 8, 16}, 0.25);
    add(r, "calculus", "br_commutator_order", rep2.decay_order, 2.0 - 0.25 - 0.1, false);
  }
  return r;
}

Results transport_suite(std::uint64_t seed) {
  Results r;
  Grid3 g(32);
  const int mu = 8;
  // shear closed form
  {
    std::vector<PeriodicField> slices;
    for (int j = 0; j <= 8; ++j) {
      PeriodicField v = PeriodicField::vector(g, 0.125 + (j - 4) * 0.25 / mu);
      for (int iz = 0; iz < g.n; ++iz)
        for (int iy = 0; iy < g.n; ++iy)
          for (int ix = 0; ix < g.n; ++ix) v.at(0, ix, iy, iz) = std::sin(g.coord(iy));
      v.set_band(1);
      slices.push_back(std::move(v));
    }
    VelocitySampler vel(&slices);
    const int l = 1;
    const double t = double(l) / mu + 1.0 / mu;
    FlowMap fm = solve_flow_map(vel, g, l, mu, t);
    const double dt = t - double(l) / mu;
    double err = 0.0;
    for (int iz = 0; iz < g.n; iz += 4)
      for (int iy = 0; iy < g.n; ++iy)
        for (int ix = 0; ix < g.n; ++ix) {
          const std::size_t id = g.index(ix, iy, iz);
          err = std::max(err,
                         std::abs(fm.displacement.comp(0)[id] + std::sin(g.coord(iy)) * dt));
        }
    add(r, "transport", "shear_flow_closed_form", err, 1e-8);
    add(r, "transport", "dphi_bound_shear", fm.max_deviation - (std::exp(dt) - 1.0), 1e-9);
  }
  // random transport bounds
  {
    RandomFieldGen gen(seed);
    int fails = 0;
    for (int inst = 0; inst < 10; ++inst) {
      std::vector<PeriodicField> slices;
      PeriodicField vb = gen.vector(Grid3(24), 3, 0.5, true);
      for (int j = 0; j <= 4; ++j) {
        PeriodicField v = vb;
        v.set_time(j * 0.25 / mu);
        slices.push_back(std::move(v));
      }
      VelocitySampler vel(&slices);
      PeriodicField f0 = gen.scalar(Grid3(24), 4);
      PeriodicField src = gen.scalar(Grid3(24), 4, 0.3);
      auto rep = verify_transport_estimates(vel, f0, src, 0.0, 1.0 / mu, 4);
      if (!rep.all_ok()) ++fails;
    }
    add(r, "transport", "bounds_random_instances_failed", fails, 0.0);
  }
  return r;
}

Results iteration_suite(std::uint64_t seed) {
  Results r;
  (void)seed;
  Grid3 g(32);
  const int mu = 4;
  std::vector<double> times;
  for (int j = 0; j <= 8 * mu; ++j) times.push_back(double(j) / (8 * mu));

  // trivial state
  {
    auto state0 = EulerReynoldsState::zero(g, times);
    StepContext ctx;
    ctx.family = &standard_family();
    ctx.energy = EnergyProfile{};
    ctx.params.delta_q = 1.0;
    ctx.params.delta_q1 = 1.0;
    ctx.params.delta_q2 = 0.25;
    ctx.params.lambda_q = 1.0;
    ctx.params.lambda_q1 = 3;
    ctx.params.mu = mu;
    ctx.params.ell = 1.0 / 3.0;
    ctx.output_grid = g;
    StepExecutor ex(state0, ctx);
    const double t = 0.375;
    auto pert = ex.perturbation(t);
    add(r, "iteration", "trivial_doublesum", ex.doublesum_residual(t, pert),
        1e-10 * ctx.params.delta_q1);
    add(r, "iteration", "trivial_wc_zero", pert.wc.sup_norm(), 1e-13);
    add(r, "iteration", "trivial_wo_bound",
        pert.wo.sup_norm() - 0.5 * ex.constants().M * std::sqrt(ctx.params.delta_q1), 0.0);
    auto sa = ex.new_stress(t, pert);
    add(r, "iteration", "trivial_residual_analytic", sa.residual_rhs_analytic.sup_norm(), 1e-10);
    add(r, "iteration", "trivial_oscillation_cancellation",
        ex.oscillation_cancellation_residual(t, pert), 1e-10);
    const double v1n = sa.v1.sup_norm() + holder_seminorm_int(sa.v1, 1);
    add(r, "iteration", "trivial_div_v1_rel", divergence(sa.v1).sup_norm() / v1n, 1e-10);
    add(r, "iteration", "trivial_trace_rel",
        sa.R1.max_trace() / std::max(1e-300, sa.R1.max_abs()), 1e-11);
  }
  // seeded state
  {
    Grid3 gs(48);
    SeededStateSpec spec;
    auto state0 = make_seeded_state(gs, times, spec);
    StepContext ctx;
    ctx.family = &standard_family();
    ctx.params.delta_q = 1.0;
    ctx.params.delta_q1 = 0.5;
    ctx.params.delta_q2 = 0.25;
    ctx.params.lambda_q = 1.0;
    ctx.params.lambda_q1 = 3;
    ctx.params.mu = mu;
    ctx.params.ell = 1.0 / 3.0;
    ctx.output_grid = gs;
    ctx.energy = seeded_energy_profile(gs, spec, ctx.params.delta_q1);
    StepExecutor ex(state0, ctx);
    const double t = 0.34375;
    auto pert = ex.perturbation(t);
    add(r, "iteration", "seeded_doublesum", ex.doublesum_residual(t, pert),
        1e-10 * ctx.params.delta_q1);
    add(r, "iteration", "seeded_oscillation_cancellation",
        ex.oscillation_cancellation_residual(t, pert), 1e-6);
    PeriodicField w = pert.wo;
    w += pert.wc;
    const double wn1 = w.sup_norm() + holder_seminorm_int(w, 1);
    add(r, "iteration", "seeded_div_w_rel", divergence(w).sup_norm() / wn1, 1e-8);
    // corrector ratio monotone (within 5%) across a lambda sweep
    double prev = -1.0;
    int bad = 0;
    for (long lam : {3, 6, 9}) {
      StepContext c2 = ctx;
      c2.params.lambda_q1 = lam;
      StepExecutor e2(state0, c2);
      auto p2 = e2.perturbation(t);
      const double ratio = p2.wc.sup_norm() / p2.wo.sup_norm();
      if (prev > 0 && ratio > prev * 1.05) ++bad;
      prev = ratio;
    }
    add(r, "iteration", "corrector_ratio_sweep_monotone5pct", bad, 0.0);
  }
  return r;
}

}  // namespace

std::vector<std::string> verify_suite_names() {
  return {"fields", "beltrami", "geometry", "calculus", "transport", "iteration"};
}

std::vector<PropertyResult> run_verify_suite(const std::string& name, std::uint64_t seed) {
  if (name == "fields") return fields_suite(seed);
  if (name == "beltrami") return beltrami_suite(seed);
  if (name == "geometry") return geometry_suite(seed);
  if (name == "calculus") return calculus_suite(seed);
  if (name == "transport") return transport_suite(seed);
  if (name == "iteration") return iteration_suite(seed);
  if (name == "all") {
    Results all;
    for (const auto& s : verify_suite_names()) {
      auto r = run_verify_suite(s, seed);
      all.insert(all.end(), r.begin(), r.end());
    }
    return all;
  }
  throw InvalidInput("verify: unknown suite " + name);
}

std::string verify_results_json(const std::vector<PropertyResult>& results) {
  nlohmann::json arr = nlohmann::json::array();
  bool all = true;
  for (const auto& p : results) {
    nlohmann::json e;
    e["suite"] = p.suite;
    e["property"] = p.property;
    e["pass"] = p.pass;
    e["measured"] = p.measured;
    e["threshold"] = p.threshold;
    arr.push_back(e);
    all = all && p.pass;
  }
  nlohmann::json j;
  j["properties"] = arr;
  j["all_pass"] = all;
  return j.dump(2) + "\n";
}

}  // namespace eci
