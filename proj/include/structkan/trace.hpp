#pragma once

#include <charconv>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace structkan {

// Shortest round-trippable decimal form of a double. Used everywhere a
// float is written to a CSV/JSON/SVG artifact so repeated runs are
// byte-identical.
inline std::string format_double(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

struct TraceRow {
  int round = 0;
  double train_rmse_norm = 0.0;
  double val_rmse_norm = 0.0;
};

// Per-round normalized RMSE series of one training run.
struct TrainingTrace {
  std::vector<TraceRow> rows;
  std::uint64_t seed = 0;
  std::string engine;
  std::string config_digest;

  void append(int round, double train_rmse_norm, double val_rmse_norm) {
    if (!rows.empty() && round <= rows.back().round)
      throw std::invalid_argument("TrainingTrace: rounds must be strictly increasing");
    if (train_rmse_norm < 0.0 || val_rmse_norm < 0.0)
      throw std::invalid_argument("TrainingTrace: negative RMSE");
    rows.push_back({round, train_rmse_norm, val_rmse_norm});
  }

  std::string to_csv() const {
    std::string out = "round,train_rmse_norm,val_rmse_norm\n";
    for (const TraceRow& r : rows) {
      out += std::to_string(r.round);
      out += ',';
      out += format_double(r.train_rmse_norm);
      out += ',';
      out += format_double(r.val_rmse_norm);
      out += '\n';
    }
    return out;
  }
};

}  // namespace structkan
