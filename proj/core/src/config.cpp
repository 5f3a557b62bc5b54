#include "eci/config.hpp"

#include <fstream>

#include <json.hpp>

namespace eci {

ParamSchedule RunConfig::schedule() const {
  if (mode == ParamSchedule::Mode::Strict) return ParamSchedule::strict(a, b, c, eps, stages);
  return ParamSchedule::relaxed(deltas, lambdas, mus, ells, stages);
}

int RunConfig::grid_for_stage(int q) const {
  if (grids.empty()) throw InvalidInput("RunConfig: no grid");
  if (q < int(grids.size())) return grids[std::size_t(q)];
  return grids.back();
}

RunConfig RunConfig::from_json_text(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const std::exception& e) {
    throw InvalidInput(std::string("config: JSON parse failure: ") + e.what());
  }
  RunConfig c;
  try {
    const std::string m = j.value("mode", "relaxed");
    if (m == "strict") c.mode = ParamSchedule::Mode::Strict;
    else if (m == "relaxed") c.mode = ParamSchedule::Mode::Relaxed;
    else throw InvalidInput("config: mode must be strict or relaxed");

    c.stages = j.value("stages", 1);
    if (c.stages < 0) throw InvalidInput("config: stages must be >= 0");

    if (j.at("grid").is_array())
      for (const auto& g : j.at("grid")) c.grids.push_back(g.get<int>());
    else c.grids.push_back(j.at("grid").get<int>());
    for (int g : c.grids)
      if (g < 8 || g % 2 != 0) throw InvalidInput("config: grid entries must be even, >= 8");

    c.time_samples_per_mu = j.value("time_samples_per_mu", 8);
    c.seed = j.value("seed", std::uint64_t(1));
    c.out_dir = j.value("out", std::string());
    c.snapshot_stride = j.value("snapshot_stride", 1);
    c.flow_interp_points = j.value("flow_interp_points", 8);
    c.doublesum_stride = j.value("doublesum_stride", 0);

    if (j.contains("energy")) {
      const auto& e = j.at("energy");
      c.energy.c0 = e.value("const", 1.0);
      if (e.contains("cos")) for (const auto& x : e.at("cos")) c.energy.cos_c.push_back(x.get<double>());
      if (e.contains("sin")) for (const auto& x : e.at("sin")) c.energy.sin_c.push_back(x.get<double>());
    }
    if (!c.energy.positive()) throw InvalidInput("config: energy profile must be positive");

    if (c.mode == ParamSchedule::Mode::Strict) {
      c.a = j.at("a").get<double>();
      c.b = j.at("b").get<double>();
      c.c = j.at("c").get<double>();
      c.eps = j.value("eps", 0.01);
    } else if (c.stages > 0) {
      for (const auto& x : j.at("deltas")) c.deltas.push_back(x.get<double>());
      for (const auto& x : j.at("lambdas")) c.lambdas.push_back(x.get<long>());
      for (const auto& x : j.at("mus")) c.mus.push_back(x.get<int>());
      for (const auto& x : j.at("ells")) c.ells.push_back(x.get<double>());
    }
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("config: schema violation: ") + e.what());
  }
  // validate schedule construction eagerly
  if (c.stages > 0) (void)c.schedule();
  return c;
}

RunConfig RunConfig::from_file(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw InvalidInput("config: cannot open " + file.string());
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return from_json_text(text);
}

std::string RunConfig::canonical_json() const {
  nlohmann::json j;
  j["mode"] = mode == ParamSchedule::Mode::Strict ? "strict" : "relaxed";
  j["stages"] = stages;
  j["grid"] = grids;
  j["time_samples_per_mu"] = time_samples_per_mu;
  j["seed"] = seed;
  j["snapshot_stride"] = snapshot_stride;
  j["flow_interp_points"] = flow_interp_points;
  j["doublesum_stride"] = doublesum_stride;
  j["energy"] = {{"const", energy.c0}, {"cos", energy.cos_c}, {"sin", energy.sin_c}};
  if (mode == ParamSchedule::Mode::Strict) {
    j["a"] = a;
    j["b"] = b;
    j["c"] = c;
    j["eps"] = eps;
  } else {
    j["deltas"] = deltas;
    j["lambdas"] = lambdas;
    j["mus"] = mus;
    j["ells"] = ells;
  }
  return j.dump();  // nlohmann object keys are sorted: canonical given equal values
}

std::uint64_t RunConfig::hash() const {
  const std::string s = canonical_json();
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace eci
