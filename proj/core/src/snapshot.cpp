#include "eci/snapshot.hpp"

#include <fstream>

#include <json.hpp>

namespace eci {

void write_snapshot(const std::filesystem::path& file, const PeriodicField& f,
                    const std::string& name) {
  nlohmann::json h;
  h["name"] = name;
  h["rank"] = f.rank();
  h["N"] = f.grid().n;
  h["time"] = f.time();
  h["trace_free"] = f.trace_free();
  std::ofstream out(file, std::ios::binary);
  if (!out) throw EciError("write_snapshot: cannot open " + file.string());
  out << h.dump() << "\n";
  // in-memory layout is already component-outermost, z, y, x with x fastest
  out.write(reinterpret_cast<const char*>(f.raw().data()),
            std::streamsize(f.raw().size() * sizeof(double)));
  if (!out) throw EciError("write_snapshot: short write to " + file.string());
}

PeriodicField read_snapshot(const std::filesystem::path& file, SnapshotHeader* header) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw EciError("read_snapshot: cannot open " + file.string());
  std::string line;
  std::getline(in, line);
  const auto h = nlohmann::json::parse(line);
  SnapshotHeader hd;
  hd.name = h.at("name").get<std::string>();
  hd.rank = h.at("rank").get<int>();
  hd.n = h.at("N").get<int>();
  hd.time = h.at("time").get<double>();
  hd.trace_free = h.at("trace_free").get<bool>();
  PeriodicField f(Grid3(hd.n), hd.rank, hd.time);
  f.set_trace_free(hd.trace_free);
  in.read(reinterpret_cast<char*>(f.raw().data()),
          std::streamsize(f.raw().size() * sizeof(double)));
  if (std::size_t(in.gcount()) != f.raw().size() * sizeof(double))
    throw EciError("read_snapshot: truncated payload in " + file.string());
  if (header) *header = hd;
  return f;
}

}  // namespace eci
