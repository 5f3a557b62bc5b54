// eci -- pseudospectral convex-integration laboratory for 3D incompressible
// Euler flows on the torus.
//
// Subcommands:
//   run     execute Q inductive stages from the zero state (config JSON)
//   verify  run a module property suite, JSON verdict on stdout
//   sweep   decay-rate sweeps (cet | stationary-phase | br-commutator |
//           corrector-ratio), CSV on stdout
//   report  render a human-readable summary from a diagnostics CSV

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "eci/calculus.hpp"
#include "eci/config.hpp"
#include "eci/field_ops.hpp"
#include "eci/iteration.hpp"
#include "eci/manifest.hpp"
#include "eci/random_fields.hpp"
#include "eci/snapshot.hpp"
#include "eci/sweeps.hpp"
#include "eci/verify.hpp"

namespace fs = std::filesystem;
using namespace eci;

namespace {

int thread_cap() {
  // single-process contract; CI_THREADS caps any internal parallelism
  if (const char* s = std::getenv("CI_THREADS")) {
    const int v = std::atoi(s);
    if (v > 0) return v;
  }
  return 1;
}

std::vector<double> parse_range(const std::string& spec) {
  std::vector<double> out;
  std::stringstream ss(spec);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.empty()) continue;
    // accept "1/8" fractions and plain decimals
    const auto slash = tok.find('/');
    if (slash != std::string::npos)
      out.push_back(std::stod(tok.substr(0, slash)) / std::stod(tok.substr(slash + 1)));
    else
      out.push_back(std::stod(tok));
  }
  return out;
}

int cmd_run(const std::string& config_path, const std::string& out_override) {
  RunConfig cfg;
  try {
    cfg = RunConfig::from_file(config_path);
  } catch (const InvalidInput& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }
  const fs::path out_dir = out_override.empty() ? fs::path(cfg.out_dir.empty() ? "eci-run" : cfg.out_dir)
                                                : fs::path(out_override);
  fs::create_directories(out_dir);

  RunManifest manifest;
  manifest.config_hash = cfg.hash();

  ParamSchedule sched = cfg.schedule();
  {
    std::ostringstream echo;
    for (int q = 0; q < cfg.stages; ++q) {
      const auto p = sched.stage(q);
      echo << "q=" << q << " delta_q1=" << p.delta_q1 << " lambda_q1=" << p.lambda_q1
           << " mu=" << p.mu << " ell=" << p.ell << "; ";
    }
    manifest.schedule_echo = echo.str();
  }

  int exit_code = 0;
  try {
    // shared time grid: per-mu sampling, all mus dividing the finest
    int mu_max = 1;
    for (int q = 0; q < cfg.stages; ++q) mu_max = std::max(mu_max, sched.stage(q).mu);
    for (int q = 0; q < cfg.stages; ++q)
      if (mu_max % sched.stage(q).mu != 0)
        throw InvalidInput("run: every mu must divide the largest mu");
    const int nsamp = cfg.time_samples_per_mu * mu_max;
    std::vector<double> times;
    for (int j = 0; j <= nsamp; ++j) times.push_back(double(j) / nsamp);

    EulerReynoldsState state = EulerReynoldsState::zero(Grid3(cfg.grid_for_stage(0)), times);

    // stage 0 snapshot (the zero state): one slice stands for all
    {
      RunManifest::StageFiles sf;
      sf.stage = 0;
      const std::string name = "stage0_t0";
      write_snapshot(out_dir / (name + "_v.field"), state.slices.front().v, name + "_v");
      sf.snapshots.push_back(name + "_v.field");
      manifest.stage_files.push_back(sf);
    }

    for (int q = 0; q < cfg.stages; ++q) {
      StepContext ctx;
      ctx.family = &standard_family();
      ctx.energy = cfg.energy;
      ctx.params = sched.stage(q);
      ctx.output_grid = Grid3(cfg.grid_for_stage(q));
      ctx.flow_interp.points = cfg.flow_interp_points;
      ctx.relaxed = cfg.mode == ParamSchedule::Mode::Relaxed;
      ctx.doublesum_sample_stride = cfg.doublesum_stride;
      ctx.keep_components = false;

      auto checks = sched.check_stage(q);
      if (!ctx.relaxed)
        for (const auto& c : checks)
          if (!c.pass)
            throw EciError("strict mode: admissibility condition failed: " + c.name);

      RunManifest::StageFiles sf;
      sf.stage = q + 1;
      int snap_index = 0;
      SliceSink sink = [&](const StateSlice& sl, const std::vector<double>&) {
        if (cfg.snapshot_stride > 0 && snap_index % cfg.snapshot_stride == 0) {
          char tag[64];
          std::snprintf(tag, sizeof tag, "stage%d_%04d", q + 1, snap_index);
          write_snapshot(out_dir / (std::string(tag) + "_v.field"), sl.v, std::string(tag) + "_v");
          write_snapshot(out_dir / (std::string(tag) + "_p.field"), sl.p, std::string(tag) + "_p");
          write_snapshot(out_dir / (std::string(tag) + "_R.field"), sl.R, std::string(tag) + "_R");
          sf.snapshots.push_back(std::string(tag) + "_v.field");
          sf.snapshots.push_back(std::string(tag) + "_p.field");
          sf.snapshots.push_back(std::string(tag) + "_R.field");
        }
        ++snap_index;
      };

      const bool retain = q + 1 < cfg.stages;
      StepResult res = run_step(state, ctx, retain, sink);
      res.diagnostics.conditions = checks;

      char csvname[64];
      std::snprintf(csvname, sizeof csvname, "diagnostics_stage%d.csv", q + 1);
      {
        std::ofstream csv(out_dir / csvname, std::ios::binary);
        csv << res.diagnostics.csv();
      }
      sf.diagnostics_csv = csvname;
      sf.runtime_seconds = res.diagnostics.runtime_seconds;
      manifest.stage_files.push_back(sf);
      manifest.stages_completed = q + 1;

      for (const auto& c : checks)
        if (!c.pass)
          std::cerr << "warning: condition " << c.name << " fails (value " << c.value
                    << " > limit " << c.limit << ")\n";

      if (retain) state = std::move(*res.next_state);
    }
  } catch (const InvalidInput& e) {
    manifest.failure_reason = e.what();
    exit_code = 2;
  } catch (const EciError& e) {
    manifest.failure_reason = e.what();
    exit_code = 3;
  }

  manifest.exit_code = exit_code;
  manifest.save(out_dir / "manifest.json");
  if (!manifest.validate(out_dir)) {
    std::cerr << "manifest validation failed\n";
    return exit_code == 0 ? 3 : exit_code;
  }
  if (exit_code != 0) std::cerr << "run failed: " << manifest.failure_reason << "\n";
  return exit_code;
}

int cmd_verify(const std::string& suite, std::uint64_t seed, const std::string& out_path) {
  std::vector<PropertyResult> results;
  try {
    results = run_verify_suite(suite, seed);
  } catch (const InvalidInput& e) {
    std::cerr << "verify error: " << e.what() << "\n";
    return 2;
  }
  const std::string json = verify_results_json(results);
  if (!out_path.empty()) {
    std::ofstream out(out_path, std::ios::binary);
    out << json;
  }
  std::cout << json;
  for (const auto& p : results)
    if (!p.pass) return 1;
  return 0;
}

int cmd_sweep(const std::string& check, const std::string& range_spec, int grid_n,
              std::uint64_t seed, const std::string& out_path) {
  const auto range = parse_range(range_spec);
  if (range.empty()) {
    std::cerr << "sweep error: empty range\n";
    return 2;
  }
  Grid3 g(grid_n);
  RandomFieldGen gen(seed);
  DecayReport rep;
  try {
    if (check == "cet") {
      PeriodicField f = gen.scalar(g, 5);
      PeriodicField h = gen.scalar(g, 5);
      rep = cet_defect_sweep(f, h, range);
    } else if (check == "stationary-phase") {
      PeriodicField a = PeriodicField::scalar(g);
      for (int iz = 0; iz < g.n; ++iz)
        for (int iy = 0; iy < g.n; ++iy)
          for (int ix = 0; ix < g.n; ++ix)
            a.at(0, ix, iy, iz) = std::exp(std::sin(g.coord(ix)));
      a.set_band(14);
      std::vector<int> lambdas;
      for (double v : range) lambdas.push_back(int(std::llround(v)));
      rep = stationary_phase_integral_decay(a, {1, 0, 0}, lambdas);
    } else if (check == "br-commutator") {
      PeriodicField b = PeriodicField::scalar(g);
      for (int iz = 0; iz < g.n; ++iz)
        for (int iy = 0; iy < g.n; ++iy)
          for (int ix = 0; ix < g.n; ++ix) b.at(0, ix, iy, iz) = std::sin(g.coord(iy));
      b.set_band(1);
      PeriodicField e1 = PeriodicField::vector(g);
      std::fill(e1.comp(0), e1.comp(0) + e1.nodes(), 1.0);
      e1.set_band(0);
      std::vector<int> lambdas;
      for (double v : range) lambdas.push_back(int(std::llround(v)));
      rep = br_commutator_decay(b, e1, {1, 0, 0}, lambdas, 0.25);
    } else if (check == "corrector-ratio") {
      // ratio ||w_c||_0 / ||w_o||_0 across a lambda_{q+1} sweep on the seeded state
      rep.check = "corrector-ratio";
      const int mu = 4;
      std::vector<double> times;
      for (int j = 0; j <= 8 * mu; ++j) times.push_back(double(j) / (8 * mu));
      SeededStateSpec spec;
      auto state0 = make_seeded_state(g, times, spec);
      for (double v : range) {
        StepContext ctx;
        ctx.family = &standard_family();
        ctx.params.delta_q = 1.0;
        ctx.params.delta_q1 = 0.5;
        ctx.params.delta_q2 = 0.25;
        ctx.params.lambda_q = 1.0;
        ctx.params.lambda_q1 = long(std::llround(v));
        ctx.params.mu = mu;
        ctx.params.ell = 1.0 / 3.0;
        ctx.output_grid = g;
        ctx.energy = seeded_energy_profile(g, spec, ctx.params.delta_q1);
        StepExecutor ex(state0, ctx);
        auto pert = ex.perturbation(0.34375);
        rep.rows.push_back({v, pert.wc.sup_norm() / pert.wo.sup_norm()});
      }
      rep.order = fit_loglog_order(rep.rows);
      rep.decay_order = -rep.order;
    } else {
      std::cerr << "sweep error: unknown check " << check << "\n";
      return 2;
    }
  } catch (const EciError& e) {
    std::cerr << "sweep failed: " << e.what() << "\n";
    return 3;
  }
  const std::string csv = rep.csv();
  if (!out_path.empty()) {
    std::ofstream out(out_path, std::ios::binary);
    out << csv;
  }
  std::cout << csv;
  return 0;
}

int cmd_report(const std::string& csv_path) {
  std::ifstream in(csv_path);
  if (!in) {
    std::cerr << "report error: cannot open " << csv_path << "\n";
    return 2;
  }
  std::string line;
  std::vector<std::string> cols;
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::cout << line << "\n";
      continue;
    }
    std::stringstream ss(line);
    std::string tok;
    if (cols.empty()) {
      while (std::getline(ss, tok, ',')) cols.push_back(tok);
      continue;
    }
    std::vector<double> row;
    while (std::getline(ss, tok, ',')) row.push_back(std::atof(tok.c_str()));
    rows.push_back(std::move(row));
  }
  if (cols.empty() || rows.empty()) {
    std::cerr << "report error: no data rows\n";
    return 2;
  }
  std::cout << "\nsummary over " << rows.size() << " samples:\n";
  std::printf("  %-24s %14s %14s\n", "column", "max", "mean");
  for (std::size_t c = 1; c < cols.size(); ++c) {
    double mx = -1e300, mean = 0.0;
    for (const auto& r : rows) {
      if (c >= r.size()) continue;
      mx = std::max(mx, r[c]);
      mean += r[c];
    }
    mean /= double(rows.size());
    std::printf("  %-24s %14.6g %14.6g\n", cols[c].c_str(), mx, mean);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"eci: convex-integration iteration laboratory on the 3-torus"};
  app.require_subcommand(1);
  (void)thread_cap();

  std::string config_path, out_path, suite = "all", check, range_spec, csv_path;
  std::uint64_t seed = 0x5eed;
  int grid_n = 64;

  auto* run = app.add_subcommand("run", "execute the iteration from the zero state");
  run->add_option("--config", config_path, "run configuration JSON")->required();
  run->add_option("--out", out_path, "output directory (overrides config)");

  auto* verify = app.add_subcommand("verify", "run module property suites");
  verify->add_option("--suite", suite,
                     "all|fields|beltrami|geometry|calculus|transport|iteration");
  verify->add_option("--seed", seed, "sampling seed");
  verify->add_option("--out", out_path, "also write the JSON verdict here");

  auto* sweep = app.add_subcommand("sweep", "decay-rate sweeps, CSV output");
  sweep->add_option("--check", check, "cet|stationary-phase|br-commutator|corrector-ratio")
      ->required();
  sweep->add_option("--range", range_spec, "comma-separated sweep values (fractions ok)")
      ->required();
  sweep->add_option("--grid", grid_n, "grid resolution");
  sweep->add_option("--seed", seed, "sampling seed");
  sweep->add_option("--out", out_path, "also write the CSV here");

  auto* report = app.add_subcommand("report", "summarise a diagnostics CSV");
  report->add_option("csv", csv_path, "diagnostics CSV path")->required();

  CLI11_PARSE(app, argc, argv);

  if (run->parsed()) return cmd_run(config_path, out_path);
  if (verify->parsed()) return cmd_verify(suite, seed, out_path);
  if (sweep->parsed()) return cmd_sweep(check, range_spec, grid_n, seed, out_path);
  if (report->parsed()) return cmd_report(csv_path);
  return 2;
}
