#pragma once

#include <cmath>
#include <span>
#include <stdexcept>

namespace structkan {

// Population standard deviation (divide by N). Accumulation is plain
// left-to-right so that normalized_rmse of the mean predictor is exactly 1:
// the numerator and denominator then run the identical float operations.
inline double population_std(std::span<const double> values) {
  const std::size_t n = values.size();
  if (n == 0) throw std::invalid_argument("population_std: empty input");
  double sum = 0.0;
  for (double v : values) sum += v;
  const double mean = sum / static_cast<double>(n);
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / static_cast<double>(n));
}

// RMSE divided by the population standard deviation of the targets.
// 0 = perfect predictor, 1 = predicting the mean.
inline double normalized_rmse(std::span<const double> predictions,
                              std::span<const double> targets) {
  if (predictions.size() != targets.size())
    throw std::invalid_argument("normalized_rmse: length mismatch");
  const std::size_t n = targets.size();
  if (n < 2) throw std::invalid_argument("normalized_rmse: need at least 2 samples");

  double sum = 0.0;
  for (double y : targets) sum += y;
  const double mean = sum / static_cast<double>(n);

  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double e = predictions[i] - targets[i];
    num += e * e;
    const double d = targets[i] - mean;
    den += d * d;
  }
  if (den == 0.0) throw std::invalid_argument("degenerate target");
  return std::sqrt(num / static_cast<double>(n)) /
         std::sqrt(den / static_cast<double>(n));
}

}  // namespace structkan
