#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "eci/energy.hpp"
#include "eci/schedule.hpp"

namespace eci {

/// Run configuration (JSON): mode, schedule parameters or explicit sequences,
/// grids per stage, stage count, time sampling, energy profile as the
/// coefficient list of a trigonometric polynomial in t, output directory.
struct RunConfig {
  ParamSchedule::Mode mode = ParamSchedule::Mode::Relaxed;
  int stages = 1;
  std::vector<int> grids;  // one entry, or one per stage
  int time_samples_per_mu = 8;
  EnergyProfile energy;
  std::uint64_t seed = 1;
  std::string out_dir;
  int snapshot_stride = 1;
  int flow_interp_points = 8;
  int doublesum_stride = 0;

  // strict
  double a = 0.0, b = 0.0, c = 0.0, eps = 0.0;
  // relaxed
  std::vector<double> deltas;
  std::vector<long> lambdas;
  std::vector<int> mus;
  std::vector<double> ells;

  ParamSchedule schedule() const;
  int grid_for_stage(int q) const;

  static RunConfig from_json_text(const std::string& text);
  static RunConfig from_file(const std::filesystem::path& file);
  std::string canonical_json() const;
  std::uint64_t hash() const;  // FNV-1a over the canonical serialisation
};

}  // namespace eci
