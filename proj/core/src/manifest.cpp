#include "eci/manifest.hpp"

#include <fstream>

#include <json.hpp>

namespace eci {

std::string RunManifest::to_json() const {
  nlohmann::json j;
  j["config_hash"] = config_hash;
  j["schedule_echo"] = schedule_echo;
  j["stages_completed"] = stages_completed;
  j["exit_code"] = exit_code;
  j["failure_reason"] = failure_reason;
  nlohmann::json stages = nlohmann::json::array();
  for (const auto& s : stage_files) {
    nlohmann::json e;
    e["stage"] = s.stage;
    e["snapshots"] = s.snapshots;
    e["diagnostics_csv"] = s.diagnostics_csv;
    e["runtime_seconds"] = s.runtime_seconds;
    stages.push_back(e);
  }
  j["stage_files"] = stages;
  nlohmann::json suites = nlohmann::json::array();
  for (const auto& s : suite_results) {
    nlohmann::json e;
    e["suite"] = s.suite;
    e["property"] = s.property;
    e["pass"] = s.pass;
    e["measured"] = s.measured;
    e["threshold"] = s.threshold;
    suites.push_back(e);
  }
  j["suite_results"] = suites;
  return j.dump(2) + "\n";
}

RunManifest RunManifest::from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  RunManifest m;
  m.config_hash = j.at("config_hash").get<std::uint64_t>();
  m.schedule_echo = j.at("schedule_echo").get<std::string>();
  m.stages_completed = j.at("stages_completed").get<int>();
  m.exit_code = j.at("exit_code").get<int>();
  m.failure_reason = j.at("failure_reason").get<std::string>();
  for (const auto& e : j.at("stage_files")) {
    StageFiles s;
    s.stage = e.at("stage").get<int>();
    for (const auto& f : e.at("snapshots")) s.snapshots.push_back(f.get<std::string>());
    s.diagnostics_csv = e.at("diagnostics_csv").get<std::string>();
    s.runtime_seconds = e.at("runtime_seconds").get<double>();
    m.stage_files.push_back(std::move(s));
  }
  for (const auto& e : j.at("suite_results")) {
    SuiteResult s;
    s.suite = e.at("suite").get<std::string>();
    s.property = e.at("property").get<std::string>();
    s.pass = e.at("pass").get<bool>();
    s.measured = e.at("measured").get<double>();
    s.threshold = e.at("threshold").get<double>();
    m.suite_results.push_back(std::move(s));
  }
  return m;
}

void RunManifest::save(const std::filesystem::path& file) const {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw EciError("manifest: cannot open " + file.string());
  out << to_json();
}

RunManifest RunManifest::load(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw EciError("manifest: cannot open " + file.string());
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return from_json(text);
}

bool RunManifest::validate(const std::filesystem::path& base_dir) const {
  for (const auto& s : stage_files) {
    for (const auto& f : s.snapshots)
      if (!std::filesystem::exists(base_dir / f)) return false;
    if (!s.diagnostics_csv.empty() && !std::filesystem::exists(base_dir / s.diagnostics_csv))
      return false;
  }
  // round trip: load(to_json) re-serialises byte-identically
  return from_json(to_json()).to_json() == to_json();
}

}  // namespace eci
