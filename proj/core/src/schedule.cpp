#include "eci/schedule.hpp"

#include <cmath>

namespace eci {

ParamSchedule ParamSchedule::strict(double a, double b, double c, double eps, int stages) {
  if (!(a > 1.0) || !(b > 1.0) || !(c > 2.5) || !(eps > 0.0))
    throw InvalidInput("ParamSchedule: strict mode needs a>1, b>1, c>5/2, eps>0");
  ParamSchedule s;
  s.mode_ = Mode::Strict;
  s.stages_ = stages;
  s.a_ = a;
  s.b_ = b;
  s.c_ = c;
  s.eps_ = eps;
  s.beta_ = (b - 1.0) / (5.0 * b + 5.0);
  return s;
}

ParamSchedule ParamSchedule::relaxed(std::vector<double> deltas, std::vector<long> lambdas,
                                     std::vector<int> mus, std::vector<double> ells,
                                     int stages) {
  if (int(mus.size()) < stages || int(ells.size()) < stages)
    throw InvalidInput("ParamSchedule: need mu and ell per stage");
  if (deltas.empty() || lambdas.empty())
    throw InvalidInput("ParamSchedule: need at least one delta and lambda");
  for (double d : deltas)
    if (!(d > 0.0)) throw InvalidInput("ParamSchedule: deltas must be positive");
  for (long l : lambdas)
    if (l < 1) throw InvalidInput("ParamSchedule: lambdas must be positive integers");
  for (int m : mus)
    if (m < 1) throw InvalidInput("ParamSchedule: mu must be a positive integer");
  ParamSchedule s;
  s.mode_ = Mode::Relaxed;
  s.stages_ = stages;
  s.deltas_ = std::move(deltas);
  s.lambdas_ = std::move(lambdas);
  s.mus_ = std::move(mus);
  s.ells_ = std::move(ells);
  s.beta_ = 0.0;
  return s;
}

double ParamSchedule::delta(int q) const {
  if (q < 0) return 1.0;
  if (mode_ == Mode::Strict) return std::pow(a_, -std::pow(b_, double(q)));
  if (q == 0) return 1.0;
  const auto& d = deltas_;
  if (q <= int(d.size())) return d[std::size_t(q - 1)];
  // geometric extension by the last ratio (ratio 1/2 when only one entry)
  const double last = d.back();
  const double ratio = d.size() >= 2 ? d[d.size() - 1] / d[d.size() - 2] : 0.5;
  double v = last;
  for (int i = int(d.size()); i < q; ++i) v *= ratio;
  return v;
}

double ParamSchedule::lambda(int q) const {
  if (q < 0) return 1.0;
  if (mode_ == Mode::Strict) {
    const double lo = std::pow(a_, c_ * std::pow(b_, double(q + 1)));
    if (!std::isfinite(lo) || lo > 9e15)
      throw EciError("ParamSchedule: lambda overflow in strict mode (a too large for any grid)");
    return std::ceil(lo);  // smallest integer in [a^{cb^{q+1}}, 2 a^{cb^{q+1}}]
  }
  if (q == 0) return 1.0;
  const auto& l = lambdas_;
  if (q <= int(l.size())) return double(l[std::size_t(q - 1)]);
  const double last = double(l.back());
  const double ratio = l.size() >= 2 ? double(l[l.size() - 1]) / double(l[l.size() - 2]) : 4.0;
  double v = last;
  for (int i = int(l.size()); i < q; ++i) v = std::ceil(v * ratio);
  return v;
}

StageParams ParamSchedule::stage(int q) const {
  StageParams p;
  p.q = q;
  p.delta_q = delta(q);
  p.delta_q1 = delta(q + 1);
  p.delta_q2 = delta(q + 2);
  p.lambda_q = lambda(q);
  p.lambda_q1 = long(lambda(q + 1));
  if (mode_ == Mode::Strict) {
    const double mu_raw = std::pow(p.delta_q1, 0.25) * std::pow(p.delta_q, 0.25) *
                          std::sqrt(p.lambda_q) * std::sqrt(double(p.lambda_q1));
    p.mu = std::max(1, int(std::llround(mu_raw)));
    p.ell = std::pow(p.delta_q1, -0.125) * std::pow(p.delta_q, 0.125) *
            std::pow(p.lambda_q, -0.25) * std::pow(double(p.lambda_q1), -0.75);
  } else {
    p.mu = mus_[std::size_t(q)];
    p.ell = ells_[std::size_t(q)];
  }
  return p;
}

std::vector<ConditionCheck> ParamSchedule::check_stage(int q) const {
  const StageParams p = stage(q);
  std::vector<ConditionCheck> out;
  auto add = [&](const std::string& name, double value, double limit) {
    out.push_back({name, value, limit, value <= limit * (1.0 + 1e-12)});
  };
  const double sdq = std::sqrt(p.delta_q), sdq1 = std::sqrt(p.delta_q1);
  const double lam1 = double(p.lambda_q1);
  // admissibility (the three conditions)
  add("mollification_loss", sdq * p.lambda_q * p.ell / sdq1, 1.0);
  add("transport_vs_oscillation", sdq * p.lambda_q / p.mu + 1.0 / (p.ell * lam1),
      std::pow(lam1, -beta_));
  add("cutoff_vs_frequency", 1.0 / lam1, sdq1 / p.mu);
  // ordering of length scales
  add("ordering_mu_lower", 1.0 / (sdq1 * lam1), 1.0 / p.mu);
  add("ordering_mu_upper", 1.0 / p.mu, 1.0 / (sdq * p.lambda_q));
  add("ordering_ell_lower", 1.0 / lam1, p.ell);
  add("ordering_ell_upper", p.ell, 1.0 / p.lambda_q);
  // monotonicity
  add("amplitude_frequency_growth", sdq * std::pow(p.lambda_q, 0.2),
      sdq1 * std::pow(lam1, 0.2));
  add("delta_decreasing", p.delta_q1, p.delta_q);
  // standing assumption before rho_l
  add("delta_q2_half", p.delta_q2, 0.5 * p.delta_q1);
  return out;
}

bool ParamSchedule::strict_mode_ok(int q) const {
  for (const auto& c : check_stage(q))
    if (!c.pass) return false;
  return true;
}

}  // namespace eci
