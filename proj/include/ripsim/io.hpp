#pragma once

// CSV/JSON artifact writing and run manifests. Every output file gets exactly
// one manifest carrying the fully resolved config, seed, and output paths so a
// run can be reproduced bit-for-bit; wall time lives only in the manifest (it
// is the one non-reproducible field, and it stays out of the artifacts).

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "ripsim/device.hpp"

namespace ripsim {

inline std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path,
            const std::vector<std::string>& header)
      : columns_(header.size()), out_(path) {
    if (!out_) throw std::runtime_error("cannot open " + path.string());
    for (std::size_t i = 0; i < header.size(); ++i)
      out_ << (i ? "," : "") << header[i];
    out_ << '\n';
  }

  void row(const std::vector<std::string>& cells) {
    if (cells.size() != columns_)
      throw std::invalid_argument("csv row width mismatch");
    for (std::size_t i = 0; i < cells.size(); ++i)
      out_ << (i ? "," : "") << cells[i];
    out_ << '\n';
  }

 private:
  std::size_t columns_;
  std::ofstream out_;
};

struct RunManifest {
  std::string command;
  json resolved_config;  // full config snapshot, including derived parameters
  std::string code_version = "ripsim 1.0.0";
  std::uint64_t rng_seed = 0;
  bool seeded = false;
  double wall_seconds = 0.0;
  std::vector<std::string> outputs;
};

inline json to_json(const RunManifest& m) {
  json j;
  j["command"] = m.command;
  j["code_version"] = m.code_version;
  if (m.seeded) j["rng_seed"] = m.rng_seed;
  j["resolved_config"] = m.resolved_config;
  j["outputs"] = m.outputs;
  j["wall_seconds"] = m.wall_seconds;
  return j;
}

inline void write_json(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  out << j.dump(2) << '\n';
}

inline json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return json::parse(in);
}

/// Timer scoped to one CLI run; manifests record its total.
class WallClock {
 public:
  WallClock() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

}  // namespace ripsim
