#pragma once

#include <initializer_list>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "json.hpp"
#include "structkan/spline.hpp"
#include "structkan/topology.hpp"
#include "structkan/trees.hpp"

namespace structkan {

struct InputParams {
  bool operator==(const InputParams&) const = default;
};

struct SplineParams {
  CubicSpline spline;
  bool operator==(const SplineParams& o) const {
    return spline.domain_lo() == o.spline.domain_lo() &&
           spline.domain_hi() == o.spline.domain_hi() &&
           spline.intervals() == o.spline.intervals() &&
           spline.coefficients() == o.spline.coefficients();
  }
};

struct LinearParams {
  std::vector<double> weights;  // one per in-edge, ascending source id
  double bias = 0.0;
  bool operator==(const LinearParams&) const = default;
};

struct EnsembleParams {
  TreeEnsemble ensemble;
  bool operator==(const EnsembleParams&) const = default;
};

using NodeParams = std::variant<InputParams, SplineParams, LinearParams, EnsembleParams>;

// A validated topology plus one parameter set per node, indexed by node id.
struct NetworkModel {
  NetworkTopology topology;
  std::vector<NodeParams> params;
};

inline CubicSpline default_spline() {
  return CubicSpline(-1.0, 1.0, 8);
}

// Fresh parameter set matching each node's kind: zero-coefficient default
// splines, zero weights, empty ensembles with the given shrinkage.
inline std::vector<NodeParams> default_params(const NetworkTopology& t,
                                              double shrinkage = 0.1) {
  const auto in = t.in_sources();
  std::vector<NodeParams> params;
  params.reserve(t.nodes.size());
  for (NodeId id = 0; id < static_cast<NodeId>(t.nodes.size()); ++id) {
    switch (t.nodes[static_cast<std::size_t>(id)].role) {
      case NodeRole::Input:
        params.emplace_back(InputParams{});
        break;
      case NodeRole::Univariate:
        params.emplace_back(SplineParams{default_spline()});
        break;
      case NodeRole::Linear: {
        LinearParams lp;
        lp.weights.assign(in[static_cast<std::size_t>(id)].size(), 0.0);
        params.emplace_back(std::move(lp));
        break;
      }
      case NodeRole::BlackBox: {
        const int arity = t.nodes[static_cast<std::size_t>(id)].arity;
        params.emplace_back(EnsembleParams{TreeEnsemble(arity, 0.0, shrinkage)});
        break;
      }
    }
  }
  return params;
}

namespace detail {

[[noreturn]] inline void schema_error(const std::string& where, const std::string& what) {
  throw std::invalid_argument("model schema: " + where + ": " + what);
}

inline void check_keys(const nlohmann::json& obj, const std::string& where,
                       std::initializer_list<const char*> allowed,
                       std::initializer_list<const char*> required) {
  if (!obj.is_object()) schema_error(where, "expected an object");
  for (const auto& item : obj.items()) {
    bool known = false;
    for (const char* k : allowed) known = known || item.key() == k;
    if (!known) schema_error(where, "unknown field '" + item.key() + "'");
  }
  for (const char* k : required)
    if (!obj.contains(k)) schema_error(where, std::string("missing field '") + k + "'");
}

inline nlohmann::json tree_to_json(const RegressionTree& tree) {
  nlohmann::json jnodes = nlohmann::json::array();
  for (const TreeNode& n : tree.nodes()) {
    if (n.feature < 0) {
      jnodes.push_back({{"value", n.value}});
    } else {
      jnodes.push_back({{"feature", n.feature},
                        {"threshold", n.threshold},
                        {"left", n.left},
                        {"right", n.right}});
    }
  }
  return {{"max_depth", tree.max_depth()},
          {"min_leaf_count", tree.min_leaf_count()},
          {"nodes", std::move(jnodes)}};
}

inline RegressionTree tree_from_json(const nlohmann::json& j, const std::string& where) {
  check_keys(j, where, {"max_depth", "min_leaf_count", "nodes"},
             {"max_depth", "min_leaf_count", "nodes"});
  if (!j["nodes"].is_array() || j["nodes"].empty())
    schema_error(where, "'nodes' must be a non-empty array");
  std::vector<TreeNode> nodes;
  const int count = static_cast<int>(j["nodes"].size());
  for (int i = 0; i < count; ++i) {
    const nlohmann::json& jn = j["nodes"][static_cast<std::size_t>(i)];
    const std::string here = where + ".nodes[" + std::to_string(i) + "]";
    TreeNode n;
    if (jn.contains("value")) {
      check_keys(jn, here, {"value"}, {"value"});
      n.value = jn["value"].get<double>();
    } else {
      check_keys(jn, here, {"feature", "threshold", "left", "right"},
                 {"feature", "threshold", "left", "right"});
      n.feature = jn["feature"].get<std::int32_t>();
      n.threshold = jn["threshold"].get<double>();
      n.left = jn["left"].get<std::int32_t>();
      n.right = jn["right"].get<std::int32_t>();
      if (n.feature < 0) schema_error(here, "split feature must be >= 0");
      if (n.left < 0 || n.left >= count || n.right < 0 || n.right >= count)
        schema_error(here, "child index out of range");
    }
    nodes.push_back(n);
  }
  return RegressionTree(std::move(nodes), j["max_depth"].get<int>(),
                        j["min_leaf_count"].get<int>());
}

inline nlohmann::json params_to_json(const NetworkTopology& t, NodeId id,
                                     const NodeParams& p) {
  const NodeKind& kind = t.nodes[static_cast<std::size_t>(id)];
  switch (kind.role) {
    case NodeRole::Input:
      return {{"index", kind.input_index}};
    case NodeRole::Univariate: {
      const CubicSpline& s = std::get<SplineParams>(p).spline;
      return {{"domain", {s.domain_lo(), s.domain_hi()}},
              {"intervals", s.intervals()},
              {"coefficients", s.coefficients()}};
    }
    case NodeRole::Linear: {
      const LinearParams& lp = std::get<LinearParams>(p);
      return {{"weights", lp.weights}, {"bias", lp.bias}};
    }
    case NodeRole::BlackBox: {
      const TreeEnsemble& e = std::get<EnsembleParams>(p).ensemble;
      nlohmann::json jtrees = nlohmann::json::array();
      for (const RegressionTree& tr : e.trees()) jtrees.push_back(tree_to_json(tr));
      return {{"arity", e.arity()},
              {"base_value", e.base_value()},
              {"shrinkage", e.shrinkage()},
              {"trees", std::move(jtrees)}};
    }
  }
  return nullptr;
}

inline NodeParams params_from_json(NodeRole role, const nlohmann::json* jp,
                                   std::size_t in_degree, int arity,
                                   const std::string& where) {
  switch (role) {
    case NodeRole::Input:
      return InputParams{};
    case NodeRole::Univariate: {
      if (!jp) return SplineParams{default_spline()};
      check_keys(*jp, where, {"domain", "intervals", "coefficients"},
                 {"domain", "intervals", "coefficients"});
      const nlohmann::json& jd = (*jp)["domain"];
      if (!jd.is_array() || jd.size() != 2)
        schema_error(where, "'domain' must be [lo, hi]");
      const double lo = jd[0].get<double>();
      const double hi = jd[1].get<double>();
      const int intervals = (*jp)["intervals"].get<int>();
      if (!(lo < hi)) schema_error(where, "domain must satisfy lo < hi");
      if (intervals < 1) schema_error(where, "intervals must be >= 1");
      CubicSpline s(lo, hi, intervals);
      auto coeffs = (*jp)["coefficients"].get<std::vector<double>>();
      if (static_cast<int>(coeffs.size()) != s.coefficient_count())
        schema_error(where, "expected " + std::to_string(s.coefficient_count()) +
                                " coefficients, got " + std::to_string(coeffs.size()));
      s.coefficients() = std::move(coeffs);
      return SplineParams{std::move(s)};
    }
    case NodeRole::Linear: {
      LinearParams lp;
      if (!jp) {
        lp.weights.assign(in_degree, 0.0);
        return lp;
      }
      check_keys(*jp, where, {"weights", "bias"}, {"weights", "bias"});
      lp.weights = (*jp)["weights"].get<std::vector<double>>();
      lp.bias = (*jp)["bias"].get<double>();
      if (lp.weights.size() != in_degree)
        schema_error(where, "expected " + std::to_string(in_degree) +
                                " weights, got " + std::to_string(lp.weights.size()));
      return lp;
    }
    case NodeRole::BlackBox: {
      if (!jp) schema_error(where, "blackbox node requires params with 'arity'");
      check_keys(*jp, where, {"arity", "base_value", "shrinkage", "trees"}, {"arity"});
      const int json_arity = (*jp)["arity"].get<int>();
      if (json_arity < 1) schema_error(where, "arity must be >= 1");
      (void)arity;
      const double base = jp->contains("base_value")
                              ? (*jp)["base_value"].get<double>()
                              : 0.0;
      const double shrink = jp->contains("shrinkage")
                                ? (*jp)["shrinkage"].get<double>()
                                : 0.1;
      if (!(shrink > 0.0 && shrink <= 1.0))
        schema_error(where, "shrinkage must be in (0, 1]");
      TreeEnsemble e(json_arity, base, shrink);
      if (jp->contains("trees")) {
        const nlohmann::json& jt = (*jp)["trees"];
        if (!jt.is_array()) schema_error(where, "'trees' must be an array");
        for (std::size_t i = 0; i < jt.size(); ++i)
          e.append(tree_from_json(jt[i], where + ".trees[" + std::to_string(i) + "]"));
      }
      return EnsembleParams{std::move(e)};
    }
  }
  schema_error(where, "unhandled node kind");
}

}  // namespace detail

inline nlohmann::json model_to_json(const NetworkModel& model) {
  const NetworkTopology& t = model.topology;
  nlohmann::json jnodes = nlohmann::json::array();
  for (NodeId id = 0; id < static_cast<NodeId>(t.nodes.size()); ++id) {
    jnodes.push_back(
        {{"id", id},
         {"kind", node_role_name(t.nodes[static_cast<std::size_t>(id)].role)},
         {"params",
          detail::params_to_json(t, id, model.params[static_cast<std::size_t>(id)])}});
  }
  nlohmann::json jedges = nlohmann::json::array();
  for (const auto& [from, to] : t.edges)
    jedges.push_back(nlohmann::json::array({from, to}));
  return {{"input_dim", t.input_dim},
          {"nodes", std::move(jnodes)},
          {"edges", std::move(jedges)},
          {"output", t.output}};
}

inline std::string model_to_string(const NetworkModel& model) {
  return model_to_json(model).dump(2) + "\n";
}

// Parses and validates a topology-with-parameters document. Unknown fields
// anywhere are schema errors; the embedded topology must pass validate().
inline NetworkModel model_from_json(const nlohmann::json& j) {
  detail::check_keys(j, "document", {"input_dim", "nodes", "edges", "output"},
                     {"input_dim", "nodes", "edges", "output"});
  NetworkTopology t;
  t.input_dim = j["input_dim"].get<int>();
  t.output = j["output"].get<NodeId>();
  if (!j["nodes"].is_array()) detail::schema_error("document", "'nodes' must be an array");
  if (!j["edges"].is_array()) detail::schema_error("document", "'edges' must be an array");

  const std::size_t node_count = j["nodes"].size();
  t.nodes.resize(node_count);
  std::vector<const nlohmann::json*> jparams(node_count, nullptr);
  std::vector<bool> seen(node_count, false);
  for (const nlohmann::json& jn : j["nodes"]) {
    const std::string where =
        "nodes[" + (jn.is_object() && jn.contains("id") ? jn["id"].dump() : "?") + "]";
    detail::check_keys(jn, where, {"id", "kind", "params"}, {"id", "kind"});
    const NodeId id = jn["id"].get<NodeId>();
    if (id < 0 || static_cast<std::size_t>(id) >= node_count)
      detail::schema_error(where, "node ids must be dense 0.." +
                                      std::to_string(node_count - 1));
    if (seen[static_cast<std::size_t>(id)])
      detail::schema_error(where, "duplicate node id");
    seen[static_cast<std::size_t>(id)] = true;

    const std::string kind = jn["kind"].get<std::string>();
    const nlohmann::json* jp = jn.contains("params") ? &jn["params"] : nullptr;
    NodeKind nk;
    if (kind == "input") {
      if (!jp) detail::schema_error(where, "input node requires params with 'index'");
      detail::check_keys(*jp, where + ".params", {"index"}, {"index"});
      nk = NodeKind::input((*jp)["index"].get<int>());
    } else if (kind == "univariate") {
      nk = NodeKind::univariate();
    } else if (kind == "linear") {
      nk = NodeKind::linear();
    } else if (kind == "blackbox") {
      if (!jp || !jp->is_object() || !jp->contains("arity"))
        detail::schema_error(where, "blackbox node requires params with 'arity'");
      nk = NodeKind::black_box((*jp)["arity"].get<int>());
    } else {
      detail::schema_error(where, "unknown kind '" + kind + "'");
    }
    t.nodes[static_cast<std::size_t>(id)] = nk;
    jparams[static_cast<std::size_t>(id)] = jp;
  }

  for (const nlohmann::json& je : j["edges"]) {
    if (!je.is_array() || je.size() != 2)
      detail::schema_error("edges", "each edge must be [from, to]");
    t.edges.emplace_back(je[0].get<NodeId>(), je[1].get<NodeId>());
  }

  const ValidationReport report = validate(t);
  if (!report.ok())
    throw std::invalid_argument("invalid topology: " + report.to_string());

  NetworkModel model;
  model.topology = std::move(t);
  model.params.reserve(node_count);
  const auto in = model.topology.in_sources();
  for (NodeId id = 0; id < static_cast<NodeId>(node_count); ++id) {
    const NodeKind& nk = model.topology.nodes[static_cast<std::size_t>(id)];
    const std::string where = "nodes[" + std::to_string(id) + "].params";
    const nlohmann::json* jp =
        nk.role == NodeRole::Input ? nullptr : jparams[static_cast<std::size_t>(id)];
    model.params.push_back(detail::params_from_json(
        nk.role, jp, in[static_cast<std::size_t>(id)].size(), nk.arity, where));
  }
  return model;
}

inline NetworkModel model_from_string(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument(std::string("model schema: ") + e.what());
  }
  return model_from_json(j);
}

}  // namespace structkan
