#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "structkan/matrix.hpp"
#include "structkan/model.hpp"
#include "structkan/topology.hpp"

namespace structkan {

// All intermediate node outputs of one forward pass, indexed by node id.
struct ForwardPass {
  std::vector<std::vector<double>> columns;

  const std::vector<double>& column(NodeId id) const {
    return columns[static_cast<std::size_t>(id)];
  }
};

namespace detail {

inline void check_finite_column(const std::vector<double>& col, NodeId id) {
  for (double v : col)
    if (!std::isfinite(v))
      throw std::runtime_error("non-finite value produced at node " +
                               std::to_string(id));
}

}  // namespace detail

// Evaluates every node in topological order over the whole sample batch.
// Inputs must be finite; any node producing a non-finite value aborts with
// the offending node id in the message.
inline ForwardPass forward(const NetworkModel& model, const Matrix& inputs) {
  const NetworkTopology& t = model.topology;
  if (inputs.cols() != t.input_dim)
    throw std::invalid_argument("forward: input matrix has " +
                                std::to_string(inputs.cols()) + " columns, topology has " +
                                std::to_string(t.input_dim) + " inputs");
  const int n = inputs.rows();
  const auto in = t.in_sources();
  ForwardPass pass;
  pass.columns.assign(t.nodes.size(), {});
  for (NodeId id : topological_order(t)) {
    const NodeKind& kind = t.nodes[static_cast<std::size_t>(id)];
    std::vector<double>& col = pass.columns[static_cast<std::size_t>(id)];
    col.resize(static_cast<std::size_t>(n));
    const std::vector<NodeId>& sources = in[static_cast<std::size_t>(id)];
    switch (kind.role) {
      case NodeRole::Input:
        for (int r = 0; r < n; ++r)
          col[static_cast<std::size_t>(r)] = inputs(r, kind.input_index);
        break;
      case NodeRole::Univariate: {
        const CubicSpline& s =
            std::get<SplineParams>(model.params[static_cast<std::size_t>(id)]).spline;
        const std::vector<double>& src =
            pass.columns[static_cast<std::size_t>(sources[0])];
        for (int r = 0; r < n; ++r)
          col[static_cast<std::size_t>(r)] = s.eval(src[static_cast<std::size_t>(r)]);
        break;
      }
      case NodeRole::Linear: {
        const LinearParams& lp =
            std::get<LinearParams>(model.params[static_cast<std::size_t>(id)]);
        for (int r = 0; r < n; ++r) col[static_cast<std::size_t>(r)] = lp.bias;
        for (std::size_t k = 0; k < sources.size(); ++k) {
          const std::vector<double>& src =
              pass.columns[static_cast<std::size_t>(sources[k])];
          const double w = lp.weights[k];
          for (int r = 0; r < n; ++r)
            col[static_cast<std::size_t>(r)] += w * src[static_cast<std::size_t>(r)];
        }
        break;
      }
      case NodeRole::BlackBox: {
        const TreeEnsemble& e =
            std::get<EnsembleParams>(model.params[static_cast<std::size_t>(id)])
                .ensemble;
        std::vector<double> features(sources.size());
        for (int r = 0; r < n; ++r) {
          for (std::size_t k = 0; k < sources.size(); ++k)
            features[k] =
                pass.columns[static_cast<std::size_t>(sources[k])][static_cast<std::size_t>(r)];
          col[static_cast<std::size_t>(r)] = e.predict_row(features);
        }
        break;
      }
    }
    detail::check_finite_column(col, id);
  }
  return pass;
}

inline std::vector<double> predict(const NetworkModel& model, const Matrix& inputs) {
  return forward(model, inputs).column(model.topology.output);
}

// Per-node parameter gradients, shaped like the parameters themselves:
// univariate nodes get one entry per spline coefficient, linear nodes get
// the weights followed by the bias, other nodes are empty.
struct Gradients {
  std::vector<std::vector<double>> per_node;
};

// Reverse-mode accumulation over the DAG for smooth (spline/linear) models.
// loss_grad holds d loss / d output per sample.
inline Gradients backward(const NetworkModel& model, const Matrix& inputs,
                          const ForwardPass& pass,
                          const std::vector<double>& loss_grad) {
  const NetworkTopology& t = model.topology;
  const int n = inputs.rows();
  if (static_cast<int>(loss_grad.size()) != n)
    throw std::invalid_argument("backward: loss gradient length mismatch");
  for (const NodeKind& k : t.nodes)
    if (k.role == NodeRole::BlackBox)
      throw std::invalid_argument("backward: black-box nodes have no gradient");

  const auto in = t.in_sources();
  const std::vector<NodeId> order = topological_order(t);

  Gradients g;
  g.per_node.assign(t.nodes.size(), {});
  std::vector<std::vector<double>> adjoint(t.nodes.size());
  for (std::size_t i = 0; i < t.nodes.size(); ++i)
    adjoint[i].assign(static_cast<std::size_t>(n), 0.0);
  adjoint[static_cast<std::size_t>(t.output)] = loss_grad;

  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const NodeId id = *it;
    const NodeKind& kind = t.nodes[static_cast<std::size_t>(id)];
    const std::vector<double>& adj = adjoint[static_cast<std::size_t>(id)];
    const std::vector<NodeId>& sources = in[static_cast<std::size_t>(id)];
    switch (kind.role) {
      case NodeRole::Input:
        break;
      case NodeRole::Univariate: {
        const CubicSpline& s =
            std::get<SplineParams>(model.params[static_cast<std::size_t>(id)]).spline;
        std::vector<double>& gc = g.per_node[static_cast<std::size_t>(id)];
        gc.assign(static_cast<std::size_t>(s.coefficient_count()), 0.0);
        const std::vector<double>& src =
            pass.columns[static_cast<std::size_t>(sources[0])];
        std::vector<double>& adj_src = adjoint[static_cast<std::size_t>(sources[0])];
        for (int r = 0; r < n; ++r) {
          const double a = adj[static_cast<std::size_t>(r)];
          if (a == 0.0) continue;
          const SplineEval e = s.eval_full(src[static_cast<std::size_t>(r)]);
          for (int k = 0; k < 4; ++k)
            gc[static_cast<std::size_t>(e.first + k)] += a * e.dcoeff[k];
          adj_src[static_cast<std::size_t>(r)] += a * e.dx;
        }
        break;
      }
      case NodeRole::Linear: {
        const LinearParams& lp =
            std::get<LinearParams>(model.params[static_cast<std::size_t>(id)]);
        std::vector<double>& gw = g.per_node[static_cast<std::size_t>(id)];
        gw.assign(lp.weights.size() + 1, 0.0);
        for (std::size_t k = 0; k < sources.size(); ++k) {
          const std::vector<double>& src =
              pass.columns[static_cast<std::size_t>(sources[k])];
          std::vector<double>& adj_src = adjoint[static_cast<std::size_t>(sources[k])];
          const double w = lp.weights[k];
          double acc = 0.0;
          for (int r = 0; r < n; ++r) {
            const double a = adj[static_cast<std::size_t>(r)];
            acc += a * src[static_cast<std::size_t>(r)];
            adj_src[static_cast<std::size_t>(r)] += w * a;
          }
          gw[k] = acc;
        }
        double bias_acc = 0.0;
        for (int r = 0; r < n; ++r) bias_acc += adj[static_cast<std::size_t>(r)];
        gw[lp.weights.size()] = bias_acc;
        break;
      }
      case NodeRole::BlackBox:
        break;  // rejected above
    }
  }
  return g;
}

}  // namespace structkan
