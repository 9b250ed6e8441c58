#pragma once

// Reproducibility sidecar written by every subcommand that produces files:
// what ran, with which fully resolved configuration, over which input bytes,
// and what came out. Two runs with the same flags and inputs serialize to
// identical bytes except for duration_seconds.

#include <cstdint>
#include <cstdio>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"
#include "structkan/rng.hpp"

namespace structkan {

inline std::string digest_hex(std::string_view bytes) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a64(bytes)));
  return std::string(buf);
}

struct RunManifest {
  std::string subcommand;
  nlohmann::json config = nlohmann::json::object();  // resolved, defaults included
  std::uint64_t seed = 0;
  // Path -> digest of the exact bytes read, in the order files were opened.
  std::vector<std::pair<std::string, std::string>> inputs;
  std::vector<std::string> outputs;  // files written, manifest excluded
  double duration_seconds = 0.0;
  std::string version;

  void add_input(std::string path, std::string_view bytes) {
    inputs.emplace_back(std::move(path), digest_hex(bytes));
  }
};

inline nlohmann::json manifest_to_json(const RunManifest& m) {
  nlohmann::json inputs = nlohmann::json::object();
  for (const auto& [path, digest] : m.inputs) inputs[path] = digest;
  return {{"subcommand", m.subcommand},
          {"config", m.config},
          {"seed", m.seed},
          {"inputs", std::move(inputs)},
          {"outputs", m.outputs},
          {"duration_seconds", m.duration_seconds},
          {"version", m.version}};
}

inline std::string manifest_to_string(const RunManifest& m) {
  return manifest_to_json(m).dump(2) + "\n";
}

}  // namespace structkan
