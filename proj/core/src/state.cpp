#include "eci/state.hpp"

#include <cmath>

#include "eci/beltrami.hpp"
#include "eci/calculus.hpp"
#include "eci/field_ops.hpp"
#include "eci/holder.hpp"

namespace eci {

EulerReynoldsState EulerReynoldsState::zero(Grid3 g, const std::vector<double>& times) {
  EulerReynoldsState s;
  s.stage = 0;
  s.grid = g;
  s.residual_tol = 1e-12;
  for (double t : times) {
    StateSlice sl;
    sl.t = t;
    sl.v = PeriodicField::vector(g, t);
    sl.v.set_band(0);
    sl.p = PeriodicField::scalar(g, t);
    sl.p.set_band(0);
    sl.R = PeriodicField::tensor(g, t);
    sl.R.set_band(0);
    sl.R.set_trace_free(true);
    s.slices.push_back(std::move(sl));
  }
  return s;
}

std::size_t EulerReynoldsState::index_of_time(double t) const {
  for (std::size_t j = 0; j < slices.size(); ++j)
    if (std::abs(slices[j].t - t) < 1e-11) return j;
  throw InvalidInput("EulerReynoldsState: no sample at t = " + std::to_string(t));
}

double EulerReynoldsState::sup_v() const {
  double m = 0.0;
  for (const auto& s : slices) m = std::max(m, s.v.sup_norm());
  return m;
}

StateInvariantReport EulerReynoldsState::check_invariants() const {
  StateInvariantReport rep;
  rep.recorded_tol = residual_tol;
  for (const auto& s : slices) {
    const double vsup = std::max(1e-300, s.v.sup_norm() + holder_seminorm_int(s.v, 1));
    rep.max_div_v_rel = std::max(rep.max_div_v_rel, divergence(s.v).sup_norm() / vsup);
    const double rmax = std::max(1e-300, s.R.max_abs());
    rep.max_trace_rel = std::max(rep.max_trace_rel, s.R.max_trace() / rmax);
    rep.max_mean_p = std::max(rep.max_mean_p, std::abs(s.p.mean()));
  }
  // Euler-Reynolds residual with centered differences over interior samples
  for (std::size_t j = 1; j + 1 < slices.size(); ++j) {
    const double dt = slices[j + 1].t - slices[j - 1].t;
    PeriodicField dv = slices[j + 1].v;
    dv -= slices[j - 1].v;
    dv *= 1.0 / dt;
    PeriodicField rhs = divergence(outer_sym(slices[j].v, slices[j].v));
    rhs += gradient(slices[j].p);
    rhs -= divergence(slices[j].R);
    rhs += dv;
    rep.residual = std::max(rep.residual, rhs.sup_norm());
  }
  rep.ok = rep.residual <= residual_tol && rep.max_div_v_rel <= 1e-10 &&
           rep.max_trace_rel <= 1e-11;
  return rep;
}

namespace {

// the pair (1,0,0), lambda_bar = 1: W = amplitude * sqrt(2)(0, cos s x1, -sin s x1)
PeriodicField seeded_w(Grid3 g, const SeededStateSpec& spec) {
  auto modes = build_modes(1, {{1, 0, 0}, {-1, 0, 0}});
  std::vector<std::complex<double>> amps = {{spec.amplitude, 0.0}, {spec.amplitude, 0.0}};
  return evaluate_beltrami(modes, amps, g, spec.lambda0);
}

double psi_at(const SeededStateSpec& spec, double t) {
  return spec.mod_mean + spec.mod_cos * std::cos(kTwoPi * t);
}
double psi_dt_at(const SeededStateSpec& spec, double t) {
  return -kTwoPi * spec.mod_cos * std::sin(kTwoPi * t);
}

}  // namespace

EulerReynoldsState make_seeded_state(Grid3 g, const std::vector<double>& times,
                                     const SeededStateSpec& spec) {
  EulerReynoldsState s;
  s.stage = 0;
  s.grid = g;
  PeriodicField W = seeded_w(g, spec);
  PeriodicField RW = inverse_divergence(W);
  PeriodicField W2 = dot_vv(W, W);
  const double w2_mean = W2.mean();
  for (double t : times) {
    const double psi = psi_at(spec, t);
    const double psid = psi_dt_at(spec, t);
    StateSlice sl;
    sl.t = t;
    sl.v = W;
    sl.v *= psi;
    sl.v.set_time(t);
    sl.p = W2;
    sl.p *= -psi * psi / 2.0;
    for (std::size_t i = 0; i < sl.p.nodes(); ++i)
      sl.p.comp(0)[i] += psi * psi * w2_mean / 2.0;
    sl.p.set_time(t);
    sl.R = RW;
    sl.R *= psid;
    sl.R.set_time(t);
    sl.R.set_trace_free(true);
    s.slices.push_back(std::move(sl));
  }
  // residual floor: the construction is exact in the continuum; the recorded
  // tolerance covers the centered-difference error of psi(t)
  double dt = times.size() >= 2 ? times[1] - times[0] : 0.1;
  s.residual_tol = dt * dt * std::pow(kTwoPi, 3) * std::abs(spec.mod_cos) *
                       W.sup_norm() + 1e-11;
  return s;
}

EnergyProfile seeded_energy_profile(Grid3 g, const SeededStateSpec& spec, double delta_1) {
  PeriodicField W = seeded_w(g, spec);
  const double w2 = integral_square(W);
  // psi^2 = m^2 + c^2/2 + 2 m c cos + (c^2/2) cos(2 .)
  const double m = spec.mod_mean, c = spec.mod_cos;
  EnergyProfile e;
  const double scale = w2 / (1.0 - delta_1);
  e.c0 = (m * m + c * c / 2.0) * scale;
  e.cos_c = {2.0 * m * c * scale, (c * c / 2.0) * scale};
  e.sin_c = {};
  return e;
}

}  // namespace eci
