#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "eci/errors.hpp"

namespace eci {

/// Run manifest: config hash, schedule echo, per-stage snapshot and
/// diagnostics paths, suite verdicts. Every referenced file must exist and
/// the manifest must survive a load/re-save round trip byte-identically.
struct RunManifest {
  std::uint64_t config_hash = 0;
  std::string schedule_echo;
  int stages_completed = 0;
  int exit_code = 0;
  std::string failure_reason;

  struct StageFiles {
    int stage = 0;
    std::vector<std::string> snapshots;
    std::string diagnostics_csv;
    double runtime_seconds = 0.0;
  };
  std::vector<StageFiles> stage_files;

  struct SuiteResult {
    std::string suite;
    std::string property;
    bool pass = false;
    double measured = 0.0;
    double threshold = 0.0;
  };
  std::vector<SuiteResult> suite_results;

  std::string to_json() const;
  static RunManifest from_json(const std::string& text);
  void save(const std::filesystem::path& file) const;
  static RunManifest load(const std::filesystem::path& file);

  /// Every referenced file exists and the manifest round-trips byte-identically.
  bool validate(const std::filesystem::path& base_dir) const;
};

}  // namespace eci
