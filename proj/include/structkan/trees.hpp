#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "structkan/matrix.hpp"

namespace structkan {

// Flat tree node. feature == -1 means leaf. Routing: x[feature] < threshold
// goes left, otherwise right.
struct TreeNode {
  std::int32_t feature = -1;
  std::int32_t left = -1;
  std::int32_t right = -1;
  double threshold = 0.0;
  double value = 0.0;

  bool operator==(const TreeNode&) const = default;
};

class RegressionTree {
 public:
  RegressionTree() = default;
  RegressionTree(std::vector<TreeNode> nodes, int max_depth, int min_leaf_count)
      : nodes_(std::move(nodes)), max_depth_(max_depth), min_leaf_count_(min_leaf_count) {}

  const std::vector<TreeNode>& nodes() const { return nodes_; }
  int max_depth() const { return max_depth_; }
  int min_leaf_count() const { return min_leaf_count_; }

  double predict_row(std::span<const double> features) const {
    int i = 0;
    while (nodes_[i].feature >= 0)
      i = features[nodes_[i].feature] < nodes_[i].threshold ? nodes_[i].left
                                                            : nodes_[i].right;
    return nodes_[i].value;
  }

  // Scales every leaf value. Used by the boosted trainer to give the
  // bootstrap tree unit effective weight under the ensemble's shrinkage.
  void scale_leaves(double factor) {
    for (TreeNode& n : nodes_)
      if (n.feature < 0) n.value *= factor;
  }

  // Depth of the deepest leaf; 0 for a single-leaf tree.
  int depth() const {
    int best = 0;
    struct Item { std::int32_t node; int d; };
    std::vector<Item> stack{{0, 0}};
    while (!stack.empty()) {
      auto [i, d] = stack.back();
      stack.pop_back();
      if (nodes_[i].feature < 0) {
        best = std::max(best, d);
      } else {
        stack.push_back({nodes_[i].left, d + 1});
        stack.push_back({nodes_[i].right, d + 1});
      }
    }
    return best;
  }

  bool operator==(const RegressionTree&) const = default;

 private:
  std::vector<TreeNode> nodes_;
  int max_depth_ = 0;
  int min_leaf_count_ = 1;
};

// Greedy variance-reduction CART. Split thresholds are midpoints between
// consecutive distinct sorted feature values; the best split maximizes
//   sum_L^2/n_L + sum_R^2/n_R - sum^2/n
// with ties broken toward the lowest feature index, then lowest threshold.
inline RegressionTree fit_tree(const Matrix& features, std::span<const double> targets,
                               int max_depth, int min_leaf_count) {
  const int n = features.rows();
  const int d = features.cols();
  if (n < 1) throw std::invalid_argument("fit_tree: empty dataset");
  if (static_cast<int>(targets.size()) != n)
    throw std::invalid_argument("fit_tree: row/target count mismatch");
  if (max_depth < 0) throw std::invalid_argument("fit_tree: max_depth must be >= 0");
  if (min_leaf_count < 1)
    throw std::invalid_argument("fit_tree: min_leaf_count must be >= 1");

  // One index array per feature, sorted by (value, index). Splits partition
  // these stably, so every tree node sees its samples feature-sorted.
  std::vector<std::vector<std::int32_t>> order(d, std::vector<std::int32_t>(n));
  for (int f = 0; f < d; ++f) {
    auto& idx = order[f];
    for (int i = 0; i < n; ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](std::int32_t a, std::int32_t b) {
      const double va = features(a, f), vb = features(b, f);
      if (va != vb) return va < vb;
      return a < b;
    });
  }

  std::vector<TreeNode> nodes;
  std::vector<char> go_left(n);

  struct Best {
    double gain = 0.0;
    int feature = -1;
    double threshold = 0.0;
  };

  auto build = [&](auto&& self, std::vector<std::vector<std::int32_t>>& ord,
                   int depth) -> std::int32_t {
    const auto& any = ord[0];
    const int m = static_cast<int>(any.size());
    double sum = 0.0;
    for (std::int32_t i : any) sum += targets[i];
    const double mean = sum / m;

    auto make_leaf = [&]() {
      TreeNode leaf;
      leaf.value = mean;
      nodes.push_back(leaf);
      return static_cast<std::int32_t>(nodes.size() - 1);
    };

    if (depth >= max_depth || m < 2 * min_leaf_count) return make_leaf();

    double sse = 0.0;
    for (std::int32_t i : any) sse += (targets[i] - mean) * (targets[i] - mean);
    if (sse == 0.0) return make_leaf();

    Best best;
    for (int f = 0; f < d; ++f) {
      const auto& idx = ord[f];
      double left_sum = 0.0;
      int i = 0;
      while (i < m) {
        // advance over one group of equal feature values
        const double v = features(idx[i], f);
        int j = i;
        while (j < m && features(idx[j], f) == v) {
          left_sum += targets[idx[j]];
          ++j;
        }
        if (j == m) break;
        const int n_left = j;
        const int n_right = m - j;
        if (n_left >= min_leaf_count && n_right >= min_leaf_count) {
          const double right_sum = sum - left_sum;
          const double gain = left_sum * left_sum / n_left +
                              right_sum * right_sum / n_right - sum * sum / m;
          if (gain > best.gain) {
            double thr = v + (features(idx[j], f) - v) / 2;
            if (thr <= v) thr = features(idx[j], f);  // 1-ulp gap: keep split exact
            best = {gain, f, thr};
          }
        }
        i = j;
      }
    }

    if (best.feature < 0 || best.gain <= 0.0) return make_leaf();

    for (std::int32_t i : ord[best.feature])
      go_left[i] = features(i, best.feature) < best.threshold;

    std::vector<std::vector<std::int32_t>> left_ord(d), right_ord(d);
    for (int f = 0; f < d; ++f) {
      left_ord[f].reserve(m);
      right_ord[f].reserve(m);
      for (std::int32_t i : ord[f])
        (go_left[i] ? left_ord[f] : right_ord[f]).push_back(i);
      ord[f].clear();
      ord[f].shrink_to_fit();
    }

    const std::int32_t me = static_cast<std::int32_t>(nodes.size());
    nodes.push_back({best.feature, -1, -1, best.threshold, 0.0});
    const std::int32_t l = self(self, left_ord, depth + 1);
    const std::int32_t r = self(self, right_ord, depth + 1);
    nodes[me].left = l;
    nodes[me].right = r;
    return me;
  };

  build(build, order, 0);
  return RegressionTree(std::move(nodes), max_depth, min_leaf_count);
}

// Shrinkage-weighted sum of regression trees over a fixed feature arity:
// prediction = base_value + shrinkage * sum of tree outputs.
class TreeEnsemble {
 public:
  TreeEnsemble() = default;
  TreeEnsemble(int arity, double base_value, double shrinkage)
      : arity_(arity), base_value_(base_value), shrinkage_(shrinkage) {
    if (arity < 1) throw std::invalid_argument("TreeEnsemble: arity must be >= 1");
    if (!(shrinkage > 0.0 && shrinkage <= 1.0))
      throw std::invalid_argument("TreeEnsemble: shrinkage must be in (0, 1]");
  }

  int arity() const { return arity_; }
  double base_value() const { return base_value_; }
  double shrinkage() const { return shrinkage_; }
  const std::vector<RegressionTree>& trees() const { return trees_; }

  void append(RegressionTree tree) { trees_.push_back(std::move(tree)); }

  double predict_row(std::span<const double> features) const {
    check_arity(static_cast<int>(features.size()));
    double acc = 0.0;
    for (const RegressionTree& t : trees_) acc += t.predict_row(features);
    return base_value_ + shrinkage_ * acc;
  }

  std::vector<double> predict(const Matrix& features) const {
    check_arity(features.cols());
    const int n = features.rows();
    std::vector<double> acc(n, 0.0);
    for (const RegressionTree& t : trees_)
      for (int r = 0; r < n; ++r) acc[r] += t.predict_row(features.row(r));
    for (int r = 0; r < n; ++r) acc[r] = base_value_ + shrinkage_ * acc[r];
    return acc;
  }

  bool operator==(const TreeEnsemble&) const = default;

 private:
  void check_arity(int cols) const {
    if (cols != arity_)
      throw std::invalid_argument("TreeEnsemble: feature arity " + std::to_string(cols) +
                                  " does not match training arity " +
                                  std::to_string(arity_));
  }

  int arity_ = 1;
  double base_value_ = 0.0;
  double shrinkage_ = 0.1;
  std::vector<RegressionTree> trees_;
};

}  // namespace structkan
