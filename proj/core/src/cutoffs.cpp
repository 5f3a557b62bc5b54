#include "eci/cutoffs.hpp"

#include <cmath>

namespace eci {

namespace {

// sigma(x) = exp(-1/x) for x > 0, with first and second derivatives
struct Sigma {
  double v = 0.0, d1 = 0.0, d2 = 0.0;
};

Sigma sigma(double x) {
  Sigma s;
  if (x <= 0.0) return s;
  s.v = std::exp(-1.0 / x);
  s.d1 = s.v / (x * x);
  s.d2 = s.v * (1.0 / (x * x * x * x) - 2.0 / (x * x * x));
  return s;
}

// smooth step: 0 at theta <= 0, 1 at theta >= 1
struct Step {
  double v, d1, d2;
};

Step step(double theta) {
  if (theta <= 0.0) return {0.0, 0.0, 0.0};
  if (theta >= 1.0) return {1.0, 0.0, 0.0};
  const Sigma A = sigma(theta);
  const Sigma Bs = sigma(1.0 - theta);
  const double B = Bs.v, Bp = -Bs.d1, Bpp = Bs.d2;
  const double den = A.v + B;
  const double N = A.d1 * B - A.v * Bp;
  const double Np = A.d2 * B - A.v * Bpp;
  const double dden = A.d1 + Bp;
  Step s;
  s.v = A.v / den;
  s.d1 = N / (den * den);
  s.d2 = Np / (den * den) - 2.0 * N * dden / (den * den * den);
  return s;
}

// bump g: 1 on [-1/4,1/4], 0 outside (-3/4,3/4), smooth step in between
struct Bump {
  double v, d1, d2;
};

Bump bump(double u) {
  const double au = std::abs(u);
  if (au <= 0.25) return {1.0, 0.0, 0.0};
  if (au >= 0.75) return {0.0, 0.0, 0.0};
  const double theta = (0.75 - au) * 2.0;  // 0 at |u| = 3/4, 1 at |u| = 1/4
  const Step s = step(theta);
  const double sgn = u >= 0.0 ? 1.0 : -1.0;
  return {s.v, -2.0 * sgn * s.d1, 4.0 * s.d2};
}

}  // namespace

double CutoffFamily::chi(double u) {
  const Bump g = bump(u);
  if (g.v == 0.0) return 0.0;
  double S = 0.0;
  for (int l = int(std::floor(u)) - 1; l <= int(std::floor(u)) + 1; ++l) {
    const Bump gl = bump(u - l);
    S += gl.v * gl.v;
  }
  return g.v / std::sqrt(S);
}

double CutoffFamily::chi_d1(double u) {
  const Bump g = bump(u);
  if (g.v == 0.0) return 0.0;
  double S = 0.0, S1 = 0.0;
  for (int l = int(std::floor(u)) - 1; l <= int(std::floor(u)) + 1; ++l) {
    const Bump gl = bump(u - l);
    S += gl.v * gl.v;
    S1 += 2.0 * gl.v * gl.d1;
  }
  const double si = 1.0 / std::sqrt(S);
  return g.d1 * si - 0.5 * g.v * si * si * si * S1;
}

double CutoffFamily::chi_d2(double u) {
  const Bump g = bump(u);
  if (g.v == 0.0) return 0.0;
  double S = 0.0, S1 = 0.0, S2 = 0.0;
  for (int l = int(std::floor(u)) - 1; l <= int(std::floor(u)) + 1; ++l) {
    const Bump gl = bump(u - l);
    S += gl.v * gl.v;
    S1 += 2.0 * gl.v * gl.d1;
    S2 += 2.0 * (gl.d1 * gl.d1 + gl.v * gl.d2);
  }
  const double si = 1.0 / std::sqrt(S);
  const double si3 = si * si * si;
  const double si5 = si3 * si * si;
  return g.d2 * si - g.d1 * si3 * S1 + 0.75 * g.v * si5 * S1 * S1 - 0.5 * g.v * si3 * S2;
}

std::vector<int> CutoffFamily::active(double t) const {
  std::vector<int> out;
  const double u = mu_ * t;
  for (int l = int(std::floor(u)) - 1; l <= int(std::floor(u)) + 1; ++l) {
    if (l < 0 || l > mu_) continue;
    if (std::abs(u - l) < 0.75) out.push_back(l);
  }
  return out;
}

double CutoffFamily::partition_residual(int samples) const {
  double worst = 0.0;
  for (int i = 0; i <= samples; ++i) {
    const double t = double(i) / samples;
    double s = 0.0;
    for (int l : active(t)) {
      const double c = chi_l(l, t);
      s += c * c;
    }
    worst = std::max(worst, std::abs(s - 1.0));
  }
  return worst;
}

}  // namespace eci
