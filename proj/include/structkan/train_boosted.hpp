#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "structkan/dataset.hpp"
#include "structkan/matrix.hpp"
#include "structkan/metrics.hpp"
#include "structkan/model.hpp"
#include "structkan/topology.hpp"
#include "structkan/trace.hpp"
#include "structkan/training.hpp"
#include "structkan/trees.hpp"

namespace structkan {

struct BoostedResult {
  NetworkModel model;
  TrainingTrace trace;
};

// Sensitivity probes open at this multiple of the configured window and
// anneal linearly to 1x over the round budget; see the trainer below.
inline constexpr double kProbeAnnealStart = 8.0;

namespace detail {

inline Matrix gather_columns(const std::vector<const std::vector<double>*>& columns,
                             const std::vector<NodeId>& sources) {
  const int n = static_cast<int>(columns[static_cast<std::size_t>(sources[0])]->size());
  Matrix m(n, static_cast<int>(sources.size()));
  for (std::size_t k = 0; k < sources.size(); ++k) {
    const std::vector<double>& src = *columns[static_cast<std::size_t>(sources[k])];
    for (int r = 0; r < n; ++r)
      m(r, static_cast<int>(k)) = src[static_cast<std::size_t>(r)];
  }
  return m;
}

inline Matrix gather_columns(const std::vector<std::vector<double>>& columns,
                             const std::vector<NodeId>& sources) {
  const int n = static_cast<int>(columns[static_cast<std::size_t>(sources[0])].size());
  Matrix m(n, static_cast<int>(sources.size()));
  for (std::size_t k = 0; k < sources.size(); ++k) {
    const std::vector<double>& src = columns[static_cast<std::size_t>(sources[k])];
    for (int r = 0; r < n; ++r)
      m(r, static_cast<int>(k)) = src[static_cast<std::size_t>(r)];
  }
  return m;
}

// Nodes strictly downstream of q, in topological order.
inline std::vector<NodeId> descendants(NodeId q, const std::vector<NodeId>& topo_order,
                                       const std::vector<std::vector<NodeId>>& in,
                                       std::size_t node_count) {
  std::vector<bool> reach(node_count, false);
  reach[static_cast<std::size_t>(q)] = true;
  std::vector<NodeId> result;
  for (NodeId id : topo_order) {
    if (id == q) continue;
    bool hit = false;
    for (NodeId s : in[static_cast<std::size_t>(id)])
      hit = hit || reach[static_cast<std::size_t>(s)];
    if (hit) {
      reach[static_cast<std::size_t>(id)] = true;
      result.push_back(id);
    }
  }
  return result;
}

}  // namespace detail

// Block-coordinate functional gradient boosting over a DAG of tree-ensemble
// nodes. Each round: (1) take the current per-node output columns; (2) fit
// one tree to the output node's residuals on its input columns and append
// it; (3) for every upstream trainable node q in ascending id, estimate the
// per-sample sensitivity of the (just updated) downstream ensemble to q's
// output by central differences, fit one tree on q's own input features to
// sensitivity-weighted residuals, append it, and advance q's column before
// the next node runs; (4) recompute the remaining columns and record
// normalized train/val RMSE. Before round 1 every upstream node is
// bootstrapped with one depth-2 tree fit directly to the target on its own
// features (leaves pre-scaled so the shrinkage-weighted ensemble reproduces
// the raw fit), and the output node's base value is the target mean; this
// breaks the zero-sensitivity degeneracy of a constant output node.
// `freeze_upstream` skips step 3, leaving upstream nodes at their bootstrap
// state (plain boosting of the output node).
inline BoostedResult train_boosted(const NetworkTopology& topology,
                                   const Dataset& train, const Dataset& val,
                                   const EngineConfig& config,
                                   bool freeze_upstream = false,
                                   const std::function<void(const TraceRow&)>& on_round = {}) {
  config.validate();
  if (config.engine != Engine::Boosted)
    throw std::invalid_argument("train_boosted: config.engine must be boosted");
  const ValidationReport report = validate(topology);
  if (!report.ok())
    throw std::invalid_argument("train_boosted: invalid topology: " + report.to_string());
  for (NodeId id = 0; id < topology.node_count(); ++id) {
    const NodeRole role = topology.nodes[static_cast<std::size_t>(id)].role;
    if (role != NodeRole::Input && role != NodeRole::BlackBox)
      throw std::invalid_argument("train_boosted: node " + std::to_string(id) +
                                  " is not a tree-ensemble node");
  }
  if (train.features.cols() != topology.input_dim ||
      val.features.cols() != topology.input_dim)
    throw std::invalid_argument("train_boosted: dataset width != topology inputs");
  if (train.size() < 2 || val.size() < 2)
    throw std::invalid_argument("train_boosted: need at least 2 samples per split");
  if (population_std(train.targets) == 0.0 || population_std(val.targets) == 0.0)
    throw std::invalid_argument("degenerate target");

  const double eta = config.learning_rate;
  const std::size_t node_count = topology.nodes.size();
  const std::vector<NodeId> order = topological_order(topology);
  const auto in = topology.in_sources();
  const NodeId output = topology.output;
  const int n_train = train.size();
  const int n_val = val.size();

  double target_mean = 0.0;
  for (double y : train.targets) target_mean += y;
  target_mean /= static_cast<double>(n_train);

  std::vector<TreeEnsemble> ens(node_count);
  std::vector<NodeId> trainable;  // non-input, non-output, ascending id
  for (NodeId id : order) {
    const NodeKind& k = topology.nodes[static_cast<std::size_t>(id)];
    if (k.role != NodeRole::BlackBox) continue;
    ens[static_cast<std::size_t>(id)] =
        TreeEnsemble(k.arity, id == output ? target_mean : 0.0, eta);
    if (id != output) trainable.push_back(id);
  }
  std::sort(trainable.begin(), trainable.end());

  // A node whose sources are all network inputs sees a fixed feature matrix,
  // so its column can be advanced tree-by-tree instead of re-predicted.
  std::vector<bool> static_sources(node_count, false);
  for (NodeId id = 0; id < topology.node_count(); ++id) {
    if (topology.nodes[static_cast<std::size_t>(id)].role != NodeRole::BlackBox)
      continue;
    bool all_inputs = true;
    for (NodeId s : in[static_cast<std::size_t>(id)])
      all_inputs = all_inputs &&
                   topology.nodes[static_cast<std::size_t>(s)].role == NodeRole::Input;
    static_sources[static_cast<std::size_t>(id)] = all_inputs;
  }

  std::vector<std::vector<double>> cols(node_count);   // train columns
  std::vector<std::vector<double>> vcols(node_count);  // validation columns
  for (NodeId id = 0; id < topology.node_count(); ++id) {
    const NodeKind& k = topology.nodes[static_cast<std::size_t>(id)];
    if (k.role != NodeRole::Input) continue;
    cols[static_cast<std::size_t>(id)] = train.features.column(k.input_index);
    vcols[static_cast<std::size_t>(id)] = val.features.column(k.input_index);
  }

  std::vector<Matrix> fixed_feats(node_count);   // only for static-source nodes
  std::vector<Matrix> fixed_vfeats(node_count);
  for (NodeId id = 0; id < topology.node_count(); ++id) {
    if (!static_sources[static_cast<std::size_t>(id)]) continue;
    fixed_feats[static_cast<std::size_t>(id)] =
        detail::gather_columns(cols, in[static_cast<std::size_t>(id)]);
    fixed_vfeats[static_cast<std::size_t>(id)] =
        detail::gather_columns(vcols, in[static_cast<std::size_t>(id)]);
  }

  auto full_refresh = [&](NodeId id) {
    const std::size_t i = static_cast<std::size_t>(id);
    const std::vector<NodeId>& src = in[i];
    if (static_sources[i]) {
      cols[i] = ens[i].predict(fixed_feats[i]);
      vcols[i] = ens[i].predict(fixed_vfeats[i]);
    } else {
      cols[i] = ens[i].predict(detail::gather_columns(cols, src));
      vcols[i] = ens[i].predict(detail::gather_columns(vcols, src));
    }
  };

  // Adds the newest tree's shrinkage-weighted contribution to a
  // static-source node's columns. Accumulation order differs from a full
  // re-predict only in float rounding; both paths are deterministic.
  auto apply_last_tree = [&](NodeId id) {
    const std::size_t i = static_cast<std::size_t>(id);
    const RegressionTree& tree = ens[i].trees().back();
    for (int r = 0; r < n_train; ++r)
      cols[i][static_cast<std::size_t>(r)] +=
          eta * tree.predict_row(fixed_feats[i].row(r));
    for (int r = 0; r < n_val; ++r)
      vcols[i][static_cast<std::size_t>(r)] +=
          eta * tree.predict_row(fixed_vfeats[i].row(r));
  };

  // Training-set feature view for a node's tree fit; static-source nodes
  // reuse their fixed matrix, others gather into the caller's buffer.
  Matrix gather_buf;
  auto train_features = [&](NodeId id) -> const Matrix& {
    const std::size_t i = static_cast<std::size_t>(id);
    if (static_sources[i]) return fixed_feats[i];
    gather_buf = detail::gather_columns(cols, in[i]);
    return gather_buf;
  };

  // Bootstrap pass, topological order: one depth-2 tree per upstream node.
  for (NodeId id : order) {
    if (topology.nodes[static_cast<std::size_t>(id)].role != NodeRole::BlackBox ||
        id == output)
      continue;
    RegressionTree boot =
        fit_tree(train_features(id), train.targets, 2, config.min_leaf_count);
    boot.scale_leaves(1.0 / eta);
    ens[static_cast<std::size_t>(id)].append(std::move(boot));
    full_refresh(id);
  }
  full_refresh(output);

  std::vector<std::vector<NodeId>> downstream(node_count);
  for (NodeId q : trainable)
    downstream[static_cast<std::size_t>(q)] =
        detail::descendants(q, order, in, node_count);

  // Sensitivity probe: output predictions with node q's train column
  // replaced and everything downstream of q recomputed under the current
  // ensembles; untouched nodes are read from the live train columns.
  std::vector<const std::vector<double>*> ptr(node_count);
  std::vector<std::vector<double>> scratch(node_count);
  auto probe_output = [&](NodeId q, const std::vector<double>& q_col) {
    for (std::size_t i = 0; i < node_count; ++i) ptr[i] = &cols[i];
    ptr[static_cast<std::size_t>(q)] = &q_col;
    for (NodeId id : downstream[static_cast<std::size_t>(q)]) {
      const std::size_t i = static_cast<std::size_t>(id);
      scratch[i] = ens[i].predict(detail::gather_columns(ptr, in[i]));
      ptr[i] = &scratch[i];
    }
    return *ptr[static_cast<std::size_t>(output)];
  };

  TrainingTrace trace;
  trace.seed = config.seed;
  trace.engine = engine_name(config.engine);
  {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(config_digest(config)));
    trace.config_digest = buf;
  }

  double initial_rmse = 0.0;
  int bad_rounds = 0;
  std::vector<char> advanced(node_count, 0);
  std::vector<double> residual(static_cast<std::size_t>(n_train));
  std::vector<double> pseudo(static_cast<std::size_t>(n_train));
  std::vector<double> shifted(static_cast<std::size_t>(n_train));

  for (int round = 1; round <= config.rounds; ++round) {
    // Step 2: one tree on the output node's residuals.
    const std::vector<double>& out_col = cols[static_cast<std::size_t>(output)];
    for (int i = 0; i < n_train; ++i)
      residual[static_cast<std::size_t>(i)] =
          train.targets[static_cast<std::size_t>(i)] -
          out_col[static_cast<std::size_t>(i)];
    ens[static_cast<std::size_t>(output)].append(fit_tree(
        train_features(output), residual, config.tree_depth, config.min_leaf_count));

    // Step 3: sensitivity-guided tree per upstream node, ascending id.
    if (!freeze_upstream) {
      for (NodeId q : trainable) {
        const std::size_t qi = static_cast<std::size_t>(q);
        const std::vector<double>& q_col = cols[qi];
        // Probe window: a trust-region anneal over the round budget. Early
        // rounds probe wide (kProbeAnnealStart times the configured width)
        // so the central difference reads the ensemble's coarse trend
        // rather than the nearest split edge; the window shrinks linearly
        // to the configured width for local refinement once structure has
        // settled. Width is relative to the column's current spread.
        const double frac = config.rounds > 1
                                ? static_cast<double>(round - 1) /
                                      static_cast<double>(config.rounds - 1)
                                : 0.0;
        const double anneal =
            kProbeAnnealStart + (1.0 - kProbeAnnealStart) * frac;
        double eps = std::max(
            config.probe_epsilon * anneal * population_std(q_col), 1e-6);

        auto run_probe = [&](double step, std::vector<double>& up,
                             std::vector<double>& down) {
          for (int i = 0; i < n_train; ++i)
            shifted[static_cast<std::size_t>(i)] =
                q_col[static_cast<std::size_t>(i)] + step;
          up = probe_output(q, shifted);
          for (int i = 0; i < n_train; ++i)
            shifted[static_cast<std::size_t>(i)] =
                q_col[static_cast<std::size_t>(i)] - step;
          down = probe_output(q, shifted);
          int count = 0;
          for (int i = 0; i < n_train; ++i)
            if (up[static_cast<std::size_t>(i)] != down[static_cast<std::size_t>(i)])
              ++count;
          return count;
        };

        // The downstream ensembles are piecewise constant, so a step that
        // crosses no split threshold for a sample reads as zero sensitivity
        // no matter the true trend. If the window misses every threshold
        // for every sample, widen it (doubling, capped at half the column
        // range) until some sample registers movement. A probe that moves
        // nothing even at the cap means the ensembles are genuinely flat
        // along this node, and the round contributes a zero tree.
        std::vector<double> up, down;
        int moved = run_probe(eps, up, down);
        {
          const auto [lo, hi] = std::minmax_element(q_col.begin(), q_col.end());
          const double cap = (*hi - *lo) / 2.0;
          while (moved == 0 && eps < cap) {
            eps = std::min(eps * 2.0, cap);
            moved = run_probe(eps, up, down);
          }
        }
        if (moved > 0) {
          for (int i = 0; i < n_train; ++i) {
            const double s = (up[static_cast<std::size_t>(i)] -
                              down[static_cast<std::size_t>(i)]) /
                             (2.0 * eps);
            pseudo[static_cast<std::size_t>(i)] =
                s * residual[static_cast<std::size_t>(i)];
          }
        } else {
          std::fill(pseudo.begin(), pseudo.end(), 0.0);
        }
        ens[qi].append(
            fit_tree(train_features(q), pseudo, config.tree_depth, config.min_leaf_count));
        // Advance this node's column right away so later nodes in the
        // ascending-id order probe against the already-updated network
        // state (Gauss-Seidel sweeps converge tighter than Jacobi here).
        if (static_sources[qi])
          apply_last_tree(q);
        else
          full_refresh(q);
        advanced[qi] = 1;
      }
    }

    // Step 4: advance all columns to the round's new state, record RMSE.
    for (NodeId id : order) {
      const std::size_t i = static_cast<std::size_t>(id);
      if (topology.nodes[i].role != NodeRole::BlackBox) continue;
      if (id != output && freeze_upstream) continue;  // unchanged this round
      if (advanced[i]) {
        advanced[i] = 0;
        continue;
      }
      if (static_sources[i])
        apply_last_tree(id);
      else
        full_refresh(id);
    }
    const double train_rmse =
        normalized_rmse(cols[static_cast<std::size_t>(output)], train.targets);
    const double val_rmse =
        normalized_rmse(vcols[static_cast<std::size_t>(output)], val.targets);
    trace.append(round, train_rmse, val_rmse);
    if (on_round) on_round(trace.rows.back());

    if (round == 1) {
      initial_rmse = train_rmse;
    } else {
      bad_rounds = train_rmse > 10.0 * initial_rmse ? bad_rounds + 1 : 0;
      if (bad_rounds >= 5) throw divergence_error(round, train_rmse);
    }
  }

  BoostedResult result;
  result.model.topology = topology;
  result.model.params.reserve(node_count);
  for (NodeId id = 0; id < topology.node_count(); ++id) {
    if (topology.nodes[static_cast<std::size_t>(id)].role == NodeRole::Input)
      result.model.params.emplace_back(InputParams{});
    else
      result.model.params.emplace_back(
          EnsembleParams{std::move(ens[static_cast<std::size_t>(id)])});
  }
  result.trace = std::move(trace);
  return result;
}

}  // namespace structkan
