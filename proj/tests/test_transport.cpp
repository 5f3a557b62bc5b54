#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include <filesystem>

#include "eci/field_ops.hpp"
#include "eci/interp.hpp"
#include "eci/random_fields.hpp"
#include "eci/snapshot.hpp"
#include "eci/transport.hpp"

using namespace eci;

namespace {

std::vector<PeriodicField> shear_slices(Grid3 g, const std::vector<double>& times) {
  // v = (sin x2, 0, 0), steady
  std::vector<PeriodicField> out;
  for (double t : times) {
    PeriodicField v = PeriodicField::vector(g, t);
    for (int iz = 0; iz < g.n; ++iz)
      for (int iy = 0; iy < g.n; ++iy)
        for (int ix = 0; ix < g.n; ++ix) v.at(0, ix, iy, iz) = std::sin(g.coord(iy));
    v.set_band(1);
    out.push_back(std::move(v));
  }
  return out;
}

}  // namespace

TEST_CASE("trig interpolation reproduces band-limited fields off grid") {
  Grid3 g(32);
  RandomFieldGen gen(2);
  PeriodicField f = gen.vector(g, 4);
  TrigInterpolator ti(f);
  // compare against the exact mode sum evaluated by dense regridding
  Grid3 fine(128);
  PeriodicField ff = regrid(f, fine);
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const int ix = (trial * 37) % fine.n, iy = (trial * 53) % fine.n, iz = (trial * 11) % fine.n;
    double out[3];
    ti.eval(fine.coord(ix), fine.coord(iy), fine.coord(iz), out);
    for (int c = 0; c < 3; ++c)
      worst = std::max(worst, std::abs(out[c] - ff.at(c, ix, iy, iz)));
  }
  CHECK(worst <= 1e-9 * std::max(1.0, f.sup_norm()));
}

TEST_CASE("flow map of the zero field is the identity") {
  Grid3 g(16);
  std::vector<PeriodicField> slices;
  for (double t : {0.0, 0.125, 0.25}) slices.push_back(PeriodicField::vector(g, t));
  VelocitySampler vel(&slices);
  FlowMap fm = solve_flow_map(vel, g, 1, 8, 0.2);
  CHECK(fm.displacement.sup_norm() == 0.0);
  CHECK(fm.max_deviation <= 1e-12);
  CHECK(!fm.cfl_flagged);
}

TEST_CASE("constant velocity translates: Phi(x,t) = x - c (t - l/mu)") {
  Grid3 g(16);
  std::vector<PeriodicField> slices;
  for (double t : {0.0, 0.0625, 0.125, 0.1875, 0.25}) {
    PeriodicField v = PeriodicField::vector(g, t);
    std::fill(v.comp(0), v.comp(0) + v.nodes(), 0.3);
    std::fill(v.comp(2), v.comp(2) + v.nodes(), -0.2);
    v.set_band(0);
    slices.push_back(std::move(v));
  }
  VelocitySampler vel(&slices);
  const int l = 1, mu = 8;
  const double t = 0.2;
  FlowMap fm = solve_flow_map(vel, g, l, mu, t);
  const double dt = t - double(l) / mu;
  double err = 0.0;
  for (std::size_t i = 0; i < fm.displacement.nodes(); ++i) {
    err = std::max(err, std::abs(fm.displacement.comp(0)[i] + 0.3 * dt));
    err = std::max(err, std::abs(fm.displacement.comp(1)[i]));
    err = std::max(err, std::abs(fm.displacement.comp(2)[i] - 0.2 * dt));
  }
  CHECK(err <= 1e-12);
  CHECK(fm.max_deviation <= 1e-10);
}

TEST_CASE("shear flow: closed-form characteristics to 1e-8 at the support edge") {
  Grid3 g(32);
  const int l = 2, mu = 8;
  std::vector<double> times;
  for (int j = 0; j <= 8; ++j) times.push_back(double(l) / mu - 1.0 / mu + j * 0.25 / mu);
  auto slices = shear_slices(g, times);
  VelocitySampler vel(&slices);
  const double t = double(l) / mu + 1.0 / mu;  // edge of the admissible window
  FlowMap fm = solve_flow_map(vel, g, l, mu, t);
  // Phi(x,t) = (x1 - sin(x2)(t - l/mu), x2, x3)
  const double dt = t - double(l) / mu;
  double err = 0.0;
  for (int iz = 0; iz < g.n; iz += 3)
    for (int iy = 0; iy < g.n; ++iy)
      for (int ix = 0; ix < g.n; ++ix) {
        const std::size_t id = g.index(ix, iy, iz);
        err = std::max(err, std::abs(fm.displacement.comp(0)[id] + std::sin(g.coord(iy)) * dt));
        err = std::max(err, std::abs(fm.displacement.comp(1)[id]));
        err = std::max(err, std::abs(fm.displacement.comp(2)[id]));
      }
  CHECK(err <= 1e-8);
}

TEST_CASE("composition consistency: one solve equals two chained solves") {
  Grid3 g(24);
  RandomFieldGen gen(17);
  std::vector<PeriodicField> slices;
  const int mu = 8;
  PeriodicField vbase = gen.vector(g, 3, 0.4, true);
  for (int j = 0; j <= 8; ++j) {
    PeriodicField v = vbase;  // steady flow; time interpolation is exact
    v.set_time(0.375 + j * 0.25 / mu);
    slices.push_back(std::move(v));
  }
  VelocitySampler vel(&slices);
  const int l = 4;
  const double t_mid = 0.45, t_end = 0.55;
  FlowMap direct = solve_flow_map(vel, g, l, mu, t_end);

  // chained: integrate characteristics from t_end to t_mid, then look up the
  // map anchored at l/mu evaluated at t_mid at the moved points
  FlowMap to_mid = solve_flow_map(vel, g, l, mu, t_mid);
  InterpParams tight;
  tight.points = 12;
  TrigInterpolator mid_interp(to_mid.displacement, tight);
  PeriodicField chained = PeriodicField::vector(g, t_end);
  const double h = -(t_end - t_mid) / 10;
  double k1[3], k2[3], k3[3], k4[3];
  for (int iz = 0; iz < g.n; ++iz)
    for (int iy = 0; iy < g.n; ++iy)
      for (int ix = 0; ix < g.n; ++ix) {
        double y[3] = {g.coord(ix), g.coord(iy), g.coord(iz)};
        double s = t_end;
        for (int st = 0; st < 10; ++st) {
          vel.eval(y[0], y[1], y[2], s, k1);
          vel.eval(y[0] + 0.5 * h * k1[0], y[1] + 0.5 * h * k1[1], y[2] + 0.5 * h * k1[2],
                   s + 0.5 * h, k2);
          vel.eval(y[0] + 0.5 * h * k2[0], y[1] + 0.5 * h * k2[1], y[2] + 0.5 * h * k2[2],
                   s + 0.5 * h, k3);
          vel.eval(y[0] + h * k3[0], y[1] + h * k3[1], y[2] + h * k3[2], s + h, k4);
          for (int c = 0; c < 3; ++c) y[c] += h / 6.0 * (k1[c] + 2 * k2[c] + 2 * k3[c] + k4[c]);
          s += h;
        }
        double disp_mid[3];
        mid_interp.eval(y[0], y[1], y[2], disp_mid);
        const std::size_t id = g.index(ix, iy, iz);
        chained.comp(0)[id] = y[0] + disp_mid[0] - g.coord(ix);
        chained.comp(1)[id] = y[1] + disp_mid[1] - g.coord(iy);
        chained.comp(2)[id] = y[2] + disp_mid[2] - g.coord(iz);
      }
  chained -= direct.displacement;
  CHECK(chained.sup_norm() <= 1e-8);
}

TEST_CASE("transported stress: zero flow and constant stress are unchanged") {
  Grid3 g(16);
  std::vector<PeriodicField> slices = {PeriodicField::vector(g, 0.0),
                                       PeriodicField::vector(g, 0.25)};
  VelocitySampler vel(&slices);
  FlowMap fm = solve_flow_map(vel, g, 1, 8, 0.2);

  RandomFieldGen gen(4);
  PeriodicField r = gen.tensor(g, 3, 1.0, true);
  r.set_trace_free(true);
  PeriodicField moved = transported_stress(r, fm, g);
  moved -= r;
  CHECK(moved.sup_norm() <= 1e-12);

  PeriodicField c = PeriodicField::tensor(g);
  std::fill(c.comp(1), c.comp(1) + c.nodes(), 0.7);
  c.set_band(0);
  // constant stress transports to itself under any flow
  auto slices2 = shear_slices(g, {0.0, 0.125, 0.25});
  VelocitySampler vel2(&slices2);
  FlowMap fm2 = solve_flow_map(vel2, g, 1, 8, 0.24);
  PeriodicField moved2 = transported_stress(c, fm2, g);
  moved2 -= c;
  CHECK(moved2.sup_norm() <= 1e-10);
}

TEST_CASE("transported stress: shear flow + single-mode stress closed form") {
  Grid3 g(48);
  const int l = 2, mu = 8;
  std::vector<double> times;
  for (int j = 0; j <= 8; ++j) times.push_back(0.125 + j * 0.25 / mu - 1.0 / mu);
  auto slices = shear_slices(g, times);
  VelocitySampler vel(&slices);
  const double t = 0.125 + 1.0 / mu;
  FlowMap fm = solve_flow_map(vel, g, l, mu, t);

  PeriodicField r = PeriodicField::tensor(g, 0.125);
  for (int iz = 0; iz < g.n; ++iz)
    for (int iy = 0; iy < g.n; ++iy)
      for (int ix = 0; ix < g.n; ++ix)
        r.at(Sym3::comp(0, 1), ix, iy, iz) = std::sin(g.coord(ix));
  r.set_band(1);
  r.set_trace_free(true);
  PeriodicField moved = transported_stress(r, fm, g);
  // R(x,t) = sin(x1 - sin(x2)(t - l/mu)) in the xy slot
  const double dt = t - double(l) / mu;
  double err = 0.0;
  for (int iz = 0; iz < g.n; iz += 5)
    for (int iy = 0; iy < g.n; ++iy)
      for (int ix = 0; ix < g.n; ++ix)
        err = std::max(err, std::abs(moved.at(Sym3::comp(0, 1), ix, iy, iz) -
                                     std::sin(g.coord(ix) - std::sin(g.coord(iy)) * dt)));
  CHECK(err <= 1e-8);
  // values are transported, not deformed: sup preserved within interp error
  CHECK(std::abs(moved.sup_norm() - r.sup_norm()) <= 1e-8);
}

TEST_CASE("transport bounds: trivial case is slack") {
  Grid3 g(16);
  std::vector<PeriodicField> slices = {PeriodicField::vector(g, 0.0),
                                       PeriodicField::vector(g, 0.5)};
  VelocitySampler vel(&slices);
  PeriodicField f0 = PeriodicField::scalar(g);
  f0.fill(1.5);
  f0.set_band(0);
  PeriodicField gz = PeriodicField::scalar(g);
  gz.set_band(0);
  auto rep = verify_transport_estimates(vel, f0, gz, 0.0, 0.5, 3);
  CHECK(rep.all_ok());
  for (const auto& row : rep.rows) {
    CHECK(row.f_sup == doctest::Approx(1.5));
    CHECK(row.dphi_dev <= 1e-12);
  }
}

TEST_CASE("transport bounds: shear flow with f0 = sin x1") {
  Grid3 g(32);
  const double horizon = 0.125;
  std::vector<double> times;
  for (int j = 0; j <= 4; ++j) times.push_back(j * horizon / 4);
  auto slices = shear_slices(g, times);
  VelocitySampler vel(&slices);
  PeriodicField f0 = PeriodicField::scalar(g);
  for (int iz = 0; iz < g.n; ++iz)
    for (int iy = 0; iy < g.n; ++iy)
      for (int ix = 0; ix < g.n; ++ix) f0.at(0, ix, iy, iz) = std::sin(g.coord(ix));
  f0.set_band(1);
  PeriodicField gz = PeriodicField::scalar(g);
  gz.set_band(0);
  auto rep = verify_transport_estimates(vel, f0, gz, 0.0, horizon, 4);
  CHECK(rep.all_ok());
  // closed form: [f(t)]_1 = sqrt(1 + t^2), well inside the Gronwall bound
  for (const auto& row : rep.rows) {
    CHECK(row.f_1 == doctest::Approx(std::sqrt(1.0 + row.t * row.t)).epsilon(1e-4));
    CHECK(row.f_1 < row.f_1_bound);
  }
}

TEST_CASE("transport bounds hold for random band-limited data, horizon 1/8") {
  Grid3 g(24);
  RandomFieldGen gen(90);
  const int mu = 8;
  for (int inst = 0; inst < 3; ++inst) {
    std::vector<PeriodicField> slices;
    PeriodicField vbase = gen.vector(g, 3, 0.5, true);
    for (int j = 0; j <= 4; ++j) {
      PeriodicField v = vbase;
      v.set_time(j * 0.25 / mu);
      slices.push_back(std::move(v));
    }
    VelocitySampler vel(&slices);
    PeriodicField f0 = gen.scalar(g, 4);
    PeriodicField src = gen.scalar(g, 4, 0.3);
    auto rep = verify_transport_estimates(vel, f0, src, 0.0, 1.0 / mu, 4);
    CHECK(rep.all_ok());
  }
}

TEST_CASE("flow maps dump in the field snapshot format") {
  namespace fs = std::filesystem;
  Grid3 g(16);
  auto slices = shear_slices(g, {0.0, 0.125, 0.25});
  VelocitySampler vel(&slices);
  FlowMap fm = solve_flow_map(vel, g, 1, 8, 0.2);
  const fs::path dir = fs::temp_directory_path() / "eci_flow_snap";
  fs::create_directories(dir);
  write_flow_snapshot(dir / "fm", fm);
  SnapshotHeader hd;
  PeriodicField disp = read_snapshot(dir / "fm_disp.field", &hd);
  CHECK(hd.rank == 1);
  CHECK(disp.raw() == fm.displacement.raw());
  PeriodicField j2 = read_snapshot(dir / "fm_jac2.field");
  CHECK(j2.raw() == fm.jacobian_rows[2].raw());
  fs::remove_all(dir);
}
