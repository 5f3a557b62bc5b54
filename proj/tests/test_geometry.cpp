#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "eci/geometry.hpp"

using namespace eci;

namespace {

Sym3 random_in_ball(std::mt19937_64& rng, double r0) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Sym3 e;
  for (int c = 0; c < 6; ++c) e.v[c] = u(rng);
  const double nrm = sym3_opnorm(e);
  std::uniform_real_distribution<double> radius(0.0, r0);
  const double r = radius(rng);
  Sym3 out = Sym3::identity();
  for (int c = 0; c < 6; ++c) out.v[c] += e.v[c] * (r / nrm);
  return out;
}

}  // namespace

TEST_CASE("standard family: two disjoint spanning 6-pair families, r0 >= 0.01") {
  const auto& fam = standard_family();
  CHECK(fam.family.even_set.size() == 12);
  CHECK(fam.family.odd_set.size() == 12);
  for (const auto& k : fam.family.even_set)
    for (const auto& k2 : fam.family.odd_set) CHECK(k != k2);
  CHECK(fam.even_solver.r0() >= 0.01);
  CHECK(fam.odd_solver.r0() >= 0.01);
  MESSAGE("certified r0 (even, odd) = ", fam.even_solver.r0(), ", ", fam.odd_solver.r0());
}

TEST_CASE("reconstruction at Id is exact with positive coefficients") {
  const auto& solver = standard_family().even_solver;
  const Sym3 id = Sym3::identity();
  CHECK(solver.reconstruction_residual(id) <= 1e-13);
  for (double c : solver.coefficients(id)) CHECK(c > 0.0);
}

TEST_CASE("trace identity: sum over signed k of c_k(R) = tr R") {
  const auto& solver = standard_family().even_solver;
  std::mt19937_64 rng(7);
  for (int i = 0; i < 20; ++i) {
    Sym3 r = random_in_ball(rng, 2.0);  // linearity holds beyond the ball
    const auto c = solver.coefficients(r);
    double sum = 0.0;
    for (double x : c) sum += 2.0 * x;  // each pair contributes twice
    CHECK(sum == doctest::Approx(r.trace()).epsilon(1e-11));
  }
}

TEST_CASE("100 random R in the certified ball reconstruct to 1e-12") {
  const auto& solver = standard_family().even_solver;
  std::mt19937_64 rng(2027);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    Sym3 r = random_in_ball(rng, solver.r0());
    worst = std::max(worst, solver.reconstruction_residual(r));
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("gamma at Id: equal within a pair, equals sqrt(c)") {
  const auto& solver = standard_family().odd_solver;
  const auto g = solver.gamma(Sym3::identity());
  const auto c = solver.coefficients(Sym3::identity());
  for (std::size_t p = 0; p < g.size(); ++p)
    CHECK(g[p] == doctest::Approx(std::sqrt(c[p])).epsilon(1e-14));
  // signed lookup maps k and -k to the same value
  for (std::size_t i = 0; i < solver.frequencies().size(); ++i) {
    const auto& k = solver.frequencies()[i];
    for (std::size_t j = 0; j < solver.frequencies().size(); ++j) {
      const auto& k2 = solver.frequencies()[j];
      if (k2[0] == -k[0] && k2[1] == -k[1] && k2[2] == -k[2])
        CHECK(solver.gamma_for(i, g) == solver.gamma_for(j, g));
    }
  }
}

TEST_CASE("diagonal perturbation at the ball edge stays admissible") {
  const auto& solver = standard_family().even_solver;
  Sym3 r = Sym3::identity();
  r.v[0] += solver.r0() / 2.0;
  r.v[3] -= solver.r0() / 2.0;
  const auto g = solver.gamma(r);
  for (double x : g) CHECK(std::isfinite(x));
  CHECK(solver.reconstruction_residual(r) <= 1e-12);
}

TEST_CASE("out-of-ball evaluation is rejected with the distance attached") {
  const auto& solver = standard_family().even_solver;
  Sym3 r = Sym3::identity();
  r.v[1] += 1.5 * solver.r0();  // |R - Id| = 1.5 r0 > r0
  try {
    solver.gamma(r);
    CHECK(false);
  } catch (const OutOfBallError& e) {
    CHECK(e.distance > solver.r0());
    CHECK(e.radius == solver.r0());
  }
}

TEST_CASE("Lipschitz bound |gamma(R) - gamma(R')| <= L |R - R'| on the ball") {
  const auto& solver = standard_family().even_solver;
  std::mt19937_64 rng(99);
  for (std::size_t p = 0; p < solver.pair_count(); ++p) {
    const double L = solver.linear_norm_estimate(p) / (2.0 * std::sqrt(solver.m0()));
    for (int i = 0; i < 25; ++i) {
      Sym3 a = random_in_ball(rng, solver.r0());
      Sym3 b = random_in_ball(rng, solver.r0());
      const double ga = std::sqrt(solver.coefficients(a)[p]);
      const double gb = std::sqrt(solver.coefficients(b)[p]);
      const double dist = sym3_opnorm(a - b);
      CHECK(std::abs(ga - gb) <= L * dist * 1.0001 + 1e-14);
    }
  }
}

TEST_CASE("span-deficient family is rejected") {
  // A single pair cannot span the 6-dim space.
  CHECK_THROWS_AS(build_gamma_solver({{2, 1, 0}, {-2, -1, 0}}, 1e-3, 512), InvalidInput);
}

TEST_CASE("solver JSON round-trip keeps the certificate") {
  const auto& solver = standard_family().even_solver;
  GammaSolver back = GammaSolver::from_json(solver.to_json());
  CHECK(back.r0() <= solver.r0() + 1e-12);
  CHECK(back.pair_count() == solver.pair_count());
  const Sym3 id = Sym3::identity();
  const auto c1 = solver.coefficients(id);
  const auto c2 = back.coefficients(id);
  for (std::size_t p = 0; p < c1.size(); ++p)
    CHECK(c1[p] == doctest::Approx(c2[p]).epsilon(1e-12));
}
