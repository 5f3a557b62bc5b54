#pragma once

#include <algorithm>
#include <array>
#include <cmath>

namespace eci {

/// Symmetric 3x3 matrix stored as (xx, xy, xz, yy, yz, zz).
struct Sym3 {
  double v[6] = {0, 0, 0, 0, 0, 0};

  static constexpr int comp(int i, int j) {
    // (0,0)->0 (0,1)->1 (0,2)->2 (1,1)->3 (1,2)->4 (2,2)->5
    if (i > j) std::swap(i, j);
    return i == 0 ? j : (i == 1 ? 2 + j : 5);
  }

  double operator()(int i, int j) const { return v[comp(i, j)]; }
  double& at(int i, int j) { return v[comp(i, j)]; }

  static Sym3 identity() { return Sym3{{1, 0, 0, 1, 0, 1}}; }

  double trace() const { return v[0] + v[3] + v[5]; }

  Sym3 operator+(const Sym3& o) const {
    Sym3 r;
    for (int c = 0; c < 6; ++c) r.v[c] = v[c] + o.v[c];
    return r;
  }
  Sym3 operator-(const Sym3& o) const {
    Sym3 r;
    for (int c = 0; c < 6; ++c) r.v[c] = v[c] - o.v[c];
    return r;
  }
  Sym3 operator*(double s) const {
    Sym3 r;
    for (int c = 0; c < 6; ++c) r.v[c] = v[c] * s;
    return r;
  }

  std::array<double, 3> apply(const std::array<double, 3>& x) const {
    return {v[0] * x[0] + v[1] * x[1] + v[2] * x[2],
            v[1] * x[0] + v[3] * x[1] + v[4] * x[2],
            v[2] * x[0] + v[4] * x[1] + v[5] * x[2]};
  }
};

inline constexpr double kTwoPiThird = 2.0943951023931954923;

/// Eigenvalues of a symmetric 3x3, ascending (closed-form trigonometric method).
inline std::array<double, 3> sym3_eigenvalues(const Sym3& a) {
  const double p1 = a.v[1] * a.v[1] + a.v[2] * a.v[2] + a.v[4] * a.v[4];
  if (p1 == 0.0) {
    std::array<double, 3> e = {a.v[0], a.v[3], a.v[5]};
    std::sort(e.begin(), e.end());
    return e;
  }
  const double q = a.trace() / 3.0;
  const double d0 = a.v[0] - q, d1 = a.v[3] - q, d2 = a.v[5] - q;
  const double p2 = d0 * d0 + d1 * d1 + d2 * d2 + 2.0 * p1;
  const double p = std::sqrt(p2 / 6.0);
  // B = (A - q I)/p, r = det(B)/2
  const double b00 = d0 / p, b11 = d1 / p, b22 = d2 / p;
  const double b01 = a.v[1] / p, b02 = a.v[2] / p, b12 = a.v[4] / p;
  double r = b00 * (b11 * b22 - b12 * b12) - b01 * (b01 * b22 - b12 * b02) +
             b02 * (b01 * b12 - b11 * b02);
  r *= 0.5;
  r = std::clamp(r, -1.0, 1.0);
  const double phi = std::acos(r) / 3.0;
  const double e1 = q + 2.0 * p * std::cos(phi);
  const double e3 = q + 2.0 * p * std::cos(phi + 2.0 * kTwoPiThird);
  const double e2 = 3.0 * q - e1 - e3;
  std::array<double, 3> e = {e3, e2, e1};
  std::sort(e.begin(), e.end());
  return e;
}

/// Matrix operator norm |A| = max_{|v|=1} |Av| (= max |eigenvalue| for symmetric A).
inline double sym3_opnorm(const Sym3& a) {
  const auto e = sym3_eigenvalues(a);
  return std::max(std::abs(e[0]), std::abs(e[2]));
}

}  // namespace eci
