#pragma once

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "daytrip/common.hpp"
#include "daytrip/rng.hpp"

namespace daytrip {

inline std::uint64_t file_fnv1a64(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot hash missing file " + path);
  std::uint64_t h = 14695981039346656037ull;
  char buf[1 << 16];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) {
    std::streamsize n = in.gcount();
    for (std::streamsize i = 0; i < n; ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 1099511628211ull;
    }
  }
  return h;
}

inline std::string hash_hex(std::uint64_t h) {
  std::ostringstream o;
  o << std::hex << std::setfill('0') << std::setw(16) << h;
  return o.str();
}

// Per-stage record of everything that went in and came out. Wall time is the
// one field excluded from byte-identity comparisons between reruns.
struct RunManifest {
  std::string stage;
  std::uint64_t global_seed = 0;
  std::uint64_t stage_seed = 0;
  int threads = 1;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  nlohmann::ordered_json parameters;
  double wall_time_s = 0;
};

inline std::uint64_t derive_stage_seed(std::uint64_t global_seed, const std::string& stage) {
  return mix_seed(global_seed, stage);
}

inline void write_manifest(const RunManifest& m, const std::string& path) {
  nlohmann::ordered_json j;
  j["stage"] = m.stage;
  j["global_seed"] = m.global_seed;
  j["stage_seed"] = m.stage_seed;
  j["threads"] = m.threads;
  auto entry_list = [](const std::vector<std::string>& paths) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const std::string& p : paths) {
      nlohmann::ordered_json e;
      e["path"] = p;
      e["fnv1a64"] = hash_hex(file_fnv1a64(p));
      arr.push_back(e);
    }
    return arr;
  };
  j["inputs"] = entry_list(m.inputs);
  j["outputs"] = entry_list(m.outputs);
  j["parameters"] = m.parameters.is_null() ? nlohmann::ordered_json::object() : m.parameters;
  j["wall_time_s"] = m.wall_time_s;
  std::ofstream out(path);
  if (!out) throw Error("cannot write manifest " + path);
  out << j.dump(2) << "\n";
}

class WallClock {
 public:
  WallClock() : start_(std::chrono::steady_clock::now()) {}
  double elapsed_s() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

}  // namespace daytrip
