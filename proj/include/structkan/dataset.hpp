#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "structkan/expr.hpp"
#include "structkan/matrix.hpp"
#include "structkan/rng.hpp"

namespace structkan {

struct Dataset {
  Matrix features;              // one row per sample
  std::vector<double> targets;  // one entry per sample

  int size() const { return static_cast<int>(targets.size()); }
};

// Samples each feature i.i.d. uniform on [lo, hi) and evaluates the
// expression row by row. Draw order is row-major (sample 0 fully drawn
// before sample 1), so the dataset for a given seed is reproducible
// independent of how callers batch it afterwards.
inline Dataset generate_dataset(const ExprTree& expr, int n_samples,
                                std::uint64_t seed, double lo = -1.0,
                                double hi = 1.0) {
  if (n_samples < 1) throw std::invalid_argument("generate_dataset: n_samples < 1");
  if (!(lo < hi)) throw std::invalid_argument("generate_dataset: empty range");
  const int dim = expr.variable_count();
  Dataset ds;
  ds.features = Matrix(n_samples, dim);
  ds.targets.resize(static_cast<std::size_t>(n_samples));
  Rng rng(seed);
  for (int r = 0; r < n_samples; ++r) {
    for (int c = 0; c < dim; ++c) ds.features(r, c) = rng.uniform(lo, hi);
    ds.targets[static_cast<std::size_t>(r)] = expr.eval(ds.features.row(r));
  }
  return ds;
}

struct TrainValSplit {
  Dataset train;
  Dataset val;
};

// Independent train/val sets drawn from disjoint streams derived from one
// base seed, so neither set changes when only the other's size does.
inline TrainValSplit make_train_val(const ExprTree& expr, int n_train, int n_val,
                                    std::uint64_t seed, double lo = -1.0,
                                    double hi = 1.0) {
  TrainValSplit split;
  split.train = generate_dataset(expr, n_train, derive_seed(seed, "train"), lo, hi);
  split.val = generate_dataset(expr, n_val, derive_seed(seed, "val"), lo, hi);
  return split;
}

}  // namespace structkan
