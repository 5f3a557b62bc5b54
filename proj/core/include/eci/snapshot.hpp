#pragma once

#include <filesystem>
#include <string>

#include "eci/field.hpp"

namespace eci {

/// Field snapshot file: one JSON header line {name, rank, N, time, trace_free}
/// followed by little-endian 64-bit floats, components outermost, then
/// z, y, x (x fastest) -- the in-memory layout, dumped verbatim.
void write_snapshot(const std::filesystem::path& file, const PeriodicField& f,
                    const std::string& name);

struct SnapshotHeader {
  std::string name;
  int rank = 0;
  int n = 0;
  double time = 0.0;
  bool trace_free = false;
};

PeriodicField read_snapshot(const std::filesystem::path& file, SnapshotHeader* header = nullptr);

}  // namespace eci
