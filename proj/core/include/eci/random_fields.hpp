#pragma once

#include <random>

#include "eci/field.hpp"

namespace eci {

/// Deterministic band-limited field generator for property tests and verify
/// suites. Coefficients are drawn in a fixed (kz,ky,kx) order, so a given
/// seed always produces the same field on the same grid.
class RandomFieldGen {
 public:
  explicit RandomFieldGen(std::uint64_t seed) : rng_(seed) {}

  struct Options {
    int band = 4;
    double amplitude = 1.0;     // field is rescaled to this max |component|
    bool zero_mean = true;
    bool divergence_free = false;  // rank 1 only
    bool trace_free = false;       // rank 2 only
  };

  PeriodicField field(Grid3 g, int rank, const Options& opt);

  PeriodicField scalar(Grid3 g, int band, double amp = 1.0) {
    Options o; o.band = band; o.amplitude = amp;
    return field(g, 0, o);
  }
  PeriodicField vector(Grid3 g, int band, double amp = 1.0, bool div_free = false) {
    Options o; o.band = band; o.amplitude = amp; o.divergence_free = div_free;
    return field(g, 1, o);
  }
  PeriodicField tensor(Grid3 g, int band, double amp = 1.0, bool trace_free = false) {
    Options o; o.band = band; o.amplitude = amp; o.trace_free = trace_free;
    return field(g, 2, o);
  }

 private:
  std::mt19937_64 rng_;
};

}  // namespace eci
