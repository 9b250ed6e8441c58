#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "structkan/dataset.hpp"
#include "structkan/matrix.hpp"
#include "structkan/metrics.hpp"
#include "structkan/model.hpp"
#include "structkan/network.hpp"
#include "structkan/rng.hpp"
#include "structkan/topology.hpp"
#include "structkan/trace.hpp"
#include "structkan/training.hpp"

namespace structkan {

struct SmoothResult {
  NetworkModel model;
  TrainingTrace trace;
};

// Mini-batch Adam over every spline coefficient and linear coupling weight
// of a differentiable network (input, univariate, linear nodes). Splines
// start at the identity, linear nodes at a uniform average of their
// sources, both perturbed by a small seeded jitter so symmetric nodes can
// separate. One epoch = one shuffled pass over the training set; the trace
// records normalized train/val RMSE per epoch. Aborts with
// divergence_error when the train RMSE exceeds 10x its first-epoch level
// for 5 consecutive epochs.
inline SmoothResult train_smooth(const NetworkTopology& topology, const Dataset& train,
                                 const Dataset& val, const EngineConfig& config,
                                 const std::function<void(const TraceRow&)>& on_round = {}) {
  config.validate();
  if (config.engine != Engine::Smooth)
    throw std::invalid_argument("train_smooth: config.engine must be smooth");
  const ValidationReport report = validate(topology);
  if (!report.ok())
    throw std::invalid_argument("train_smooth: invalid topology: " + report.to_string());
  for (NodeId id = 0; id < topology.node_count(); ++id) {
    const NodeRole role = topology.nodes[static_cast<std::size_t>(id)].role;
    if (role == NodeRole::BlackBox)
      throw std::invalid_argument("train_smooth: node " + std::to_string(id) +
                                  " is a tree-ensemble node; no gradient defined");
  }
  if (train.features.cols() != topology.input_dim ||
      val.features.cols() != topology.input_dim)
    throw std::invalid_argument("train_smooth: dataset width != topology inputs");
  if (train.size() < 2 || val.size() < 2)
    throw std::invalid_argument("train_smooth: need at least 2 samples per split");
  if (population_std(train.targets) == 0.0 || population_std(val.targets) == 0.0)
    throw std::invalid_argument("degenerate target");

  const std::size_t node_count = topology.nodes.size();
  const int n_train = train.size();

  NetworkModel model;
  model.topology = topology;
  model.params = default_params(topology);

  Rng init_rng(derive_seed(config.seed, "train_smooth.init"));
  auto jitter = [&]() { return 0.01 * (2.0 * init_rng.uniform() - 1.0); };
  for (NodeId id = 0; id < topology.node_count(); ++id) {
    const std::size_t i = static_cast<std::size_t>(id);
    if (auto* sp = std::get_if<SplineParams>(&model.params[i])) {
      sp->spline.set_identity();
      for (double& c : sp->spline.coefficients()) c += jitter();
    } else if (auto* lp = std::get_if<LinearParams>(&model.params[i])) {
      const double base = 1.0 / static_cast<double>(lp->weights.size());
      for (double& w : lp->weights) w = base + jitter();
      lp->bias = jitter();
    }
  }

  // Adam moment buffers, one slot per parameter, laid out exactly like the
  // per-node gradient vectors from backward().
  std::vector<std::vector<double>> m1(node_count), m2(node_count);
  for (NodeId id = 0; id < topology.node_count(); ++id) {
    const std::size_t i = static_cast<std::size_t>(id);
    if (const auto* sp = std::get_if<SplineParams>(&model.params[i])) {
      m1[i].assign(static_cast<std::size_t>(sp->spline.coefficient_count()), 0.0);
    } else if (const auto* lp = std::get_if<LinearParams>(&model.params[i])) {
      m1[i].assign(lp->weights.size() + 1, 0.0);
    }
    m2[i] = m1[i];
  }

  constexpr double kBeta1 = 0.9;
  constexpr double kBeta2 = 0.999;
  constexpr double kAdamEps = 1e-8;
  const double lr = config.learning_rate;
  std::int64_t step = 0;

  TrainingTrace trace;
  trace.seed = config.seed;
  trace.engine = engine_name(config.engine);
  {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(config_digest(config)));
    trace.config_digest = buf;
  }

  std::vector<int> order(static_cast<std::size_t>(n_train));
  double initial_rmse = 0.0;
  int bad_epochs = 0;

  for (int epoch = 1; epoch <= config.rounds; ++epoch) {
    for (int i = 0; i < n_train; ++i) order[static_cast<std::size_t>(i)] = i;
    Rng shuffle_rng(
        derive_seed(config.seed, "train_smooth.shuffle." + std::to_string(epoch)));
    shuffle_rng.shuffle(order);

    for (int start = 0; start < n_train; start += config.batch_size) {
      const int bn = std::min(config.batch_size, n_train - start);
      Matrix batch(bn, topology.input_dim);
      std::vector<double> loss_grad(static_cast<std::size_t>(bn));
      for (int r = 0; r < bn; ++r) {
        const int src = order[static_cast<std::size_t>(start + r)];
        for (int c = 0; c < topology.input_dim; ++c) batch(r, c) = train.features(src, c);
      }
      const ForwardPass pass = forward(model, batch);
      const std::vector<double>& pred = pass.column(topology.output);
      for (int r = 0; r < bn; ++r) {
        const int src = order[static_cast<std::size_t>(start + r)];
        loss_grad[static_cast<std::size_t>(r)] =
            2.0 *
            (pred[static_cast<std::size_t>(r)] - train.targets[static_cast<std::size_t>(src)]) /
            static_cast<double>(bn);
      }
      const Gradients grads = backward(model, batch, pass, loss_grad);

      ++step;
      const double corr1 = 1.0 - std::pow(kBeta1, static_cast<double>(step));
      const double corr2 = 1.0 - std::pow(kBeta2, static_cast<double>(step));
      for (NodeId id = 0; id < topology.node_count(); ++id) {
        const std::size_t i = static_cast<std::size_t>(id);
        const std::vector<double>& g = grads.per_node[i];
        if (g.empty()) continue;
        double* params = nullptr;
        double* bias = nullptr;
        std::size_t n_weights = g.size();
        if (auto* sp = std::get_if<SplineParams>(&model.params[i])) {
          params = sp->spline.coefficients().data();
        } else if (auto* lp = std::get_if<LinearParams>(&model.params[i])) {
          params = lp->weights.data();
          bias = &lp->bias;
          n_weights = lp->weights.size();
        }
        for (std::size_t k = 0; k < g.size(); ++k) {
          double& m = m1[i][k];
          double& v = m2[i][k];
          m = kBeta1 * m + (1.0 - kBeta1) * g[k];
          v = kBeta2 * v + (1.0 - kBeta2) * g[k] * g[k];
          const double update = lr * (m / corr1) / (std::sqrt(v / corr2) + kAdamEps);
          if (k < n_weights)
            params[k] -= update;
          else
            *bias -= update;
        }
      }
    }

    const ForwardPass train_pass = forward(model, train.features);
    const ForwardPass val_pass = forward(model, val.features);
    const double train_rmse =
        normalized_rmse(train_pass.column(topology.output), train.targets);
    const double val_rmse = normalized_rmse(val_pass.column(topology.output), val.targets);
    trace.append(epoch, train_rmse, val_rmse);
    if (on_round) on_round(trace.rows.back());

    if (epoch == 1) {
      initial_rmse = train_rmse;
    } else {
      bad_epochs = train_rmse > 10.0 * initial_rmse ? bad_epochs + 1 : 0;
      if (bad_epochs >= 5) throw divergence_error(epoch, train_rmse);
    }
  }

  return {std::move(model), std::move(trace)};
}

}  // namespace structkan
