#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "eci/fft.hpp"
#include "eci/field.hpp"
#include "eci/field_ops.hpp"
#include "eci/holder.hpp"
#include "eci/random_fields.hpp"

using namespace eci;

namespace {

PeriodicField sample_scalar(Grid3 g, double (*fn)(double, double, double)) {
  PeriodicField f = PeriodicField::scalar(g);
  for (int iz = 0; iz < g.n; ++iz)
    for (int iy = 0; iy < g.n; ++iy)
      for (int ix = 0; ix < g.n; ++ix)
        f.at(0, ix, iy, iz) = fn(g.coord(ix), g.coord(iy), g.coord(iz));
  return f;
}

}  // namespace

TEST_CASE("transform round-trip on band-limited data") {
  Grid3 g(32);
  RandomFieldGen gen(101);
  PeriodicField f = gen.scalar(g, 8);
  Spectrum s = fft_forward(f);
  PeriodicField back(g, 0);
  fft_inverse(s, back);
  double err = 0.0;
  for (std::size_t i = 0; i < f.nodes(); ++i)
    err = std::max(err, std::abs(back.comp(0)[i] - f.comp(0)[i]));
  CHECK(err <= 1e-12 * f.sup_norm());
}

TEST_CASE("derivative of a constant is zero") {
  Grid3 g(16);
  PeriodicField f = PeriodicField::scalar(g);
  f.fill(3.7);
  f.set_band(0);
  PeriodicField d = spectral_derivative(f, 1);
  CHECK(d.sup_norm() <= 1e-12);
}

TEST_CASE("derivative of sin(3x) is 3cos(3x)") {
  Grid3 g(32);
  PeriodicField f = sample_scalar(g, [](double x, double, double) { return std::sin(3 * x); });
  f.set_band(3);
  PeriodicField d = spectral_derivative(f, 1);
  double err = 0.0;
  for (int ix = 0; ix < g.n; ++ix)
    err = std::max(err, std::abs(d.at(0, ix, 3, 5) - 3.0 * std::cos(3 * g.coord(ix))));
  CHECK(err <= 1e-12);
}

TEST_CASE("spectral derivative matches centered differences at O(h^2)") {
  // Finite-difference oracle at 3 dyadic resolutions: the FD error of the
  // *same* band-limited function must shrink by ~4x per refinement.
  RandomFieldGen gen(77);
  Grid3 coarse(16);
  PeriodicField f0 = gen.scalar(coarse, 5);
  double prev_err = -1.0;
  std::vector<double> errs;
  for (int n : {32, 64, 128}) {
    Grid3 g(n);
    PeriodicField f = regrid(f0, g);
    PeriodicField d = spectral_derivative(f, 1);
    double err = 0.0;
    const double h = g.spacing();
    for (int iz = 0; iz < n; iz += 3)
      for (int iy = 0; iy < n; iy += 3)
        for (int ix = 0; ix < n; ++ix) {
          const double fd = (f.at(0, (ix + 1) % n, iy, iz) - f.at(0, (ix + n - 1) % n, iy, iz)) / (2 * h);
          err = std::max(err, std::abs(fd - d.at(0, ix, iy, iz)));
        }
    errs.push_back(err);
    if (prev_err > 0) CHECK(err < prev_err / 3.0);  // ~4x for O(h^2)
    prev_err = err;
  }
  CHECK(errs.back() < errs.front() / 9.0);
}

TEST_CASE("divergence of constant tensor is zero") {
  Grid3 g(16);
  PeriodicField t = PeriodicField::tensor(g);
  for (int c : {0, 3, 5})
    std::fill(t.comp(c), t.comp(c) + t.nodes(), 2.5);
  t.set_band(0);
  PeriodicField d = divergence(t);
  CHECK(d.sup_norm() <= 1e-12);
}

TEST_CASE("divergence of -cos(x3)(e1 x e3 + e3 x e1) is (sin x3, 0, 0)") {
  Grid3 g(32);
  PeriodicField t = PeriodicField::tensor(g);
  for (int iz = 0; iz < g.n; ++iz) {
    const double v = -std::cos(g.coord(iz));
    for (int iy = 0; iy < g.n; ++iy)
      for (int ix = 0; ix < g.n; ++ix)
        t.at(Sym3::comp(0, 2), ix, iy, iz) = v;
  }
  t.set_band(1);
  PeriodicField d = divergence(t);
  double err = 0.0;
  for (int iz = 0; iz < g.n; ++iz)
    for (int iy = 0; iy < g.n; iy += 5)
      for (int ix = 0; ix < g.n; ix += 5) {
        err = std::max(err, std::abs(d.at(0, ix, iy, iz) - std::sin(g.coord(iz))));
        err = std::max(err, std::abs(d.at(1, ix, iy, iz)));
        err = std::max(err, std::abs(d.at(2, ix, iy, iz)));
      }
  CHECK(err <= 1e-12);
}

TEST_CASE("holder norms: zero field") {
  Grid3 g(16);
  PeriodicField f = PeriodicField::scalar(g);
  auto rep = holder_norm(f, 2, 0.5);
  CHECK(rep.value == 0.0);
  CHECK(rep.seminorm == 0.0);
}

TEST_CASE("holder seminorm [sin(lambda x)]_1 = lambda within 1%") {
  Grid3 g(64);
  for (int lam : {2, 5, 11, 16}) {
    PeriodicField f = PeriodicField::scalar(g);
    for (int iz = 0; iz < g.n; ++iz)
      for (int iy = 0; iy < g.n; ++iy)
        for (int ix = 0; ix < g.n; ++ix)
          f.at(0, ix, iy, iz) = std::sin(lam * g.coord(ix));
    f.set_band(lam);
    const double s1 = holder_seminorm_int(f, 1);
    CHECK(std::abs(s1 - lam) <= 0.01 * lam);
  }
}

TEST_CASE("interpolation inequality [f]_s <= 2 ||f||_0^(1-s/r) [f]_r^(s/r)") {
  RandomFieldGen gen(2024);
  Grid3 g(32);
  int violations = 0;
  for (int trial = 0; trial < 50; ++trial) {
    PeriodicField f = gen.scalar(g, 6);
    const double f0 = f.sup_norm();
    const double f1 = holder_seminorm_int(f, 1);
    const double f2 = holder_seminorm_int(f, 2);
    if (f1 > 2.0 * std::sqrt(f0 * f2)) ++violations;
  }
  CHECK(violations == 0);
}

TEST_CASE("holder seminorm monotone under grid refinement") {
  RandomFieldGen gen(5);
  Grid3 g(16);
  PeriodicField f = gen.scalar(g, 5);
  const double coarse = holder_norm(f, 0, 0.5).seminorm;
  PeriodicField f2 = regrid(f, Grid3(32));
  const double fine = holder_norm(f2, 0, 0.5).seminorm;
  CHECK(fine >= coarse - 1e-12);
}

TEST_CASE("Leibniz rule for de-aliased products") {
  RandomFieldGen gen(42);
  Grid3 g(32);
  PeriodicField f = gen.scalar(g, 10);
  PeriodicField v = gen.vector(g, 10);
  PeriodicField fv = mult_sv(f, v);
  PeriodicField lhs = divergence(fv);
  PeriodicField rhs = mult_ss(f, divergence(v));
  rhs += dot_vv(gradient(f), v);
  double err = 0.0;
  for (std::size_t i = 0; i < lhs.nodes(); ++i)
    err = std::max(err, std::abs(lhs.comp(0)[i] - rhs.comp(0)[i]));
  CHECK(err <= 1e-10 * std::max(1.0, lhs.sup_norm()));
}

TEST_CASE("band hints trigger exact de-aliasing") {
  // sin(15x)*sin(15x) on a 32-grid: the mode-30 part is kept, and the grid
  // cannot alias it onto retained modes when the product goes through the
  // padded path.
  Grid3 g(32);
  PeriodicField f = sample_scalar(g, [](double x, double, double) { return std::sin(15 * x); });
  f.set_band(15);
  PeriodicField p = mult_ss(f, f);
  // mean of sin^2 = 1/2 exactly
  CHECK(std::abs(p.mean() - 0.5) < 1e-13);
  // and the retained spectrum has no spurious content below mode 30
  Spectrum s = fft_forward(p);
  double spurious = 0.0;
  for (int kx = 1; kx < 15; ++kx) spurious = std::max(spurious, std::abs(s.comp(0)[kx]));
  CHECK(spurious < 1e-13);
}

TEST_CASE("derivative of under-resolved data raises an aliasing error") {
  Grid3 g(16);
  PeriodicField f = PeriodicField::scalar(g);
  // energy exactly at the Nyquist band
  for (int iz = 0; iz < g.n; ++iz)
    for (int iy = 0; iy < g.n; ++iy)
      for (int ix = 0; ix < g.n; ++ix) f.at(0, ix, iy, iz) = std::cos(8.0 * g.coord(ix));
  CHECK_THROWS_AS(spectral_derivative(f, 1), AliasingError);
}
