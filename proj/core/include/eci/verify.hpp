#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace eci {

/// One property verdict: measured value against its threshold. For rate
/// checks `measured` is the fitted order and `threshold` the lower bound.
struct PropertyResult {
  std::string suite;
  std::string property;
  bool pass = false;
  double measured = 0.0;
  double threshold = 0.0;
};

std::vector<std::string> verify_suite_names();

/// Run one module's invariant/property suite with a fixed seed.
/// Suite "all" runs every module suite in order.
std::vector<PropertyResult> run_verify_suite(const std::string& name, std::uint64_t seed);

std::string verify_results_json(const std::vector<PropertyResult>& results);

}  // namespace eci
