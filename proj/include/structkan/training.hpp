#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include "structkan/rng.hpp"
#include "structkan/trace.hpp"

namespace structkan {

enum class Engine { Smooth, Boosted };

inline const char* engine_name(Engine e) {
  return e == Engine::Smooth ? "smooth" : "boosted";
}

// Training aborted because the loss ran away from its initial level.
struct divergence_error : std::runtime_error {
  int round;
  double train_rmse_norm;
  divergence_error(int r, double rmse)
      : std::runtime_error("training diverged at round " + std::to_string(r) +
                           " (train rmse_norm " + format_double(rmse) + ")"),
        round(r),
        train_rmse_norm(rmse) {}
};

struct EngineConfig {
  Engine engine = Engine::Boosted;
  int rounds = 300;            // boosting rounds / gradient-descent epochs
  double learning_rate = 0.1;  // smooth: Adam step size; boosted: shrinkage eta
  int tree_depth = 4;
  int min_leaf_count = 5;
  // Finite-difference probe window, relative to the probed column's
  // standard deviation. The boosted trainer anneals the effective window
  // from a wide multiple of this down to exactly this over the round
  // budget; see train_boosted.hpp for the schedule and the rationale.
  double probe_epsilon = 0.5;
  int batch_size = 128;  // smooth engine only
  std::uint64_t seed = 0;

  bool operator==(const EngineConfig&) const = default;

  void validate() const {
    if (rounds < 1) throw std::invalid_argument("EngineConfig: rounds < 1");
    if (!(learning_rate > 0.0) || learning_rate > 1.0)
      throw std::invalid_argument("EngineConfig: learning_rate outside (0,1]");
    if (tree_depth < 1) throw std::invalid_argument("EngineConfig: tree_depth < 1");
    if (min_leaf_count < 1)
      throw std::invalid_argument("EngineConfig: min_leaf_count < 1");
    if (!(probe_epsilon > 0.0))
      throw std::invalid_argument("EngineConfig: probe_epsilon <= 0");
    if (batch_size < 1) throw std::invalid_argument("EngineConfig: batch_size < 1");
  }
};

inline EngineConfig boosted_defaults() {
  EngineConfig c;
  c.engine = Engine::Boosted;
  c.learning_rate = 0.1;
  return c;
}

inline EngineConfig smooth_defaults() {
  EngineConfig c;
  c.engine = Engine::Smooth;
  c.learning_rate = 1e-2;
  return c;
}

// Canonical textual form, the basis of the trace's config digest.
inline std::string config_canonical(const EngineConfig& c) {
  std::string s;
  s += "engine=";
  s += engine_name(c.engine);
  s += ";rounds=" + std::to_string(c.rounds);
  s += ";learning_rate=" + format_double(c.learning_rate);
  s += ";tree_depth=" + std::to_string(c.tree_depth);
  s += ";min_leaf_count=" + std::to_string(c.min_leaf_count);
  s += ";probe_epsilon=" + format_double(c.probe_epsilon);
  s += ";batch_size=" + std::to_string(c.batch_size);
  s += ";seed=" + std::to_string(c.seed);
  return s;
}

inline std::uint64_t config_digest(const EngineConfig& c) {
  return fnv1a64(config_canonical(c));
}

}  // namespace structkan
