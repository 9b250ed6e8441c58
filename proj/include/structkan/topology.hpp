#pragma once

#include <algorithm>
#include <cstdint>
#include <queue>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace structkan {

using NodeId = int;

enum class NodeRole { Input, Univariate, Linear, BlackBox };

inline const char* node_role_name(NodeRole r) {
  switch (r) {
    case NodeRole::Input: return "input";
    case NodeRole::Univariate: return "univariate";
    case NodeRole::Linear: return "linear";
    case NodeRole::BlackBox: return "blackbox";
  }
  return "?";
}

// What a node is: an input coordinate, a one-input nonlinear node, a linear
// coupling, or an opaque multi-input regressor.
struct NodeKind {
  NodeRole role = NodeRole::Input;
  int input_index = -1;  // Input only
  int arity = -1;        // BlackBox only

  static NodeKind input(int index) { return {NodeRole::Input, index, -1}; }
  static NodeKind univariate() { return {NodeRole::Univariate, -1, -1}; }
  static NodeKind linear() { return {NodeRole::Linear, -1, -1}; }
  static NodeKind black_box(int arity) { return {NodeRole::BlackBox, -1, arity}; }

  bool operator==(const NodeKind&) const = default;
};

// Feedforward network structure. Node ids are dense: node i is nodes[i].
struct NetworkTopology {
  int input_dim = 0;
  std::vector<NodeKind> nodes;
  std::vector<std::pair<NodeId, NodeId>> edges;
  NodeId output = -1;

  int node_count() const { return static_cast<int>(nodes.size()); }

  // m in the counting argument.
  int univariate_count() const {
    return static_cast<int>(std::count_if(nodes.begin(), nodes.end(), [](const NodeKind& k) {
      return k.role == NodeRole::Univariate;
    }));
  }
  // c in the counting argument.
  int linear_count() const {
    return static_cast<int>(std::count_if(nodes.begin(), nodes.end(), [](const NodeKind& k) {
      return k.role == NodeRole::Linear;
    }));
  }

  // In-edge sources of each node, ascending source id. This order also
  // defines the weight/feature indexing of linear and black-box nodes.
  std::vector<std::vector<NodeId>> in_sources() const {
    std::vector<std::vector<NodeId>> in(nodes.size());
    for (const auto& [a, b] : edges)
      if (b >= 0 && b < node_count() && a >= 0 && a < node_count())
        in[b].push_back(a);
    for (auto& v : in) std::sort(v.begin(), v.end());
    return in;
  }

  std::vector<std::vector<NodeId>> out_targets() const {
    std::vector<std::vector<NodeId>> out(nodes.size());
    for (const auto& [a, b] : edges)
      if (b >= 0 && b < node_count() && a >= 0 && a < node_count())
        out[a].push_back(b);
    for (auto& v : out) std::sort(v.begin(), v.end());
    return out;
  }

  bool operator==(const NetworkTopology&) const = default;
};

struct Violation {
  NodeId node = -1;  // -1: graph-level
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
  std::string to_string() const {
    if (ok()) return "ok";
    std::string s;
    for (const Violation& v : violations) {
      if (v.node >= 0) s += "node " + std::to_string(v.node) + ": ";
      s += v.message;
      s += '\n';
    }
    return s;
  }
};

// Checks every structural invariant; violations are data, not failures.
inline ValidationReport validate(const NetworkTopology& t) {
  ValidationReport rep;
  auto flag = [&rep](NodeId node, std::string msg) {
    rep.violations.push_back({node, std::move(msg)});
  };

  const int n = t.node_count();
  if (t.input_dim < 1) flag(-1, "input_dim must be >= 1");
  if (n == 0) {
    flag(-1, "empty node list");
    return rep;
  }
  if (t.output < 0 || t.output >= n)
    flag(-1, "output id " + std::to_string(t.output) + " out of range");

  // Per-node kind checks.
  std::set<int> seen_input_indices;
  for (NodeId id = 0; id < n; ++id) {
    const NodeKind& k = t.nodes[id];
    switch (k.role) {
      case NodeRole::Input:
        if (k.input_index < 0 || k.input_index >= t.input_dim)
          flag(id, "input index " + std::to_string(k.input_index) +
                       " out of range for input_dim " + std::to_string(t.input_dim));
        else if (!seen_input_indices.insert(k.input_index).second)
          flag(id, "duplicate input index " + std::to_string(k.input_index));
        break;
      case NodeRole::BlackBox:
        if (k.arity < 1) flag(id, "blackbox arity must be >= 1");
        break;
      default:
        break;
    }
  }

  // Edge checks.
  bool edges_sane = true;
  std::set<std::pair<NodeId, NodeId>> seen_edges;
  for (const auto& [a, b] : t.edges) {
    if (a < 0 || a >= n || b < 0 || b >= n) {
      flag(-1, "edge (" + std::to_string(a) + "," + std::to_string(b) +
                   ") references unknown node");
      edges_sane = false;
      continue;
    }
    if (a == b) flag(a, "self-loop");
    if (!seen_edges.insert({a, b}).second)
      flag(b, "duplicate edge from node " + std::to_string(a));
    if (t.nodes[b].role == NodeRole::Input)
      flag(b, "edge into input node");
  }
  if (!edges_sane) return rep;  // degree/reachability checks need valid ids

  // In-degree rules.
  std::vector<int> indeg(n, 0), outdeg(n, 0);
  for (const auto& [a, b] : t.edges) {
    ++indeg[b];
    ++outdeg[a];
  }
  for (NodeId id = 0; id < n; ++id) {
    const NodeKind& k = t.nodes[id];
    switch (k.role) {
      case NodeRole::Input:
        break;  // edges-into-input already flagged
      case NodeRole::Univariate:
        if (indeg[id] != 1)
          flag(id, "univariate node needs exactly 1 in-edge, has " +
                       std::to_string(indeg[id]));
        break;
      case NodeRole::Linear:
        if (indeg[id] < 1) flag(id, "linear node needs at least 1 in-edge");
        break;
      case NodeRole::BlackBox:
        if (k.arity >= 1 && indeg[id] != k.arity)
          flag(id, "blackbox node of arity " + std::to_string(k.arity) + " has " +
                       std::to_string(indeg[id]) + " in-edges");
        break;
    }
  }

  // Acyclicity (Kahn).
  {
    std::vector<int> deg = indeg;
    std::queue<NodeId> q;
    for (NodeId id = 0; id < n; ++id)
      if (deg[id] == 0) q.push(id);
    int visited = 0;
    auto out = t.out_targets();
    while (!q.empty()) {
      NodeId u = q.front();
      q.pop();
      ++visited;
      for (NodeId v : out[u])
        if (--deg[v] == 0) q.push(v);
    }
    if (visited != n) {
      flag(-1, "cycle detected");
      return rep;  // reachability is meaningless on a cyclic graph
    }
  }

  // Every non-input node reachable from at least one input.
  {
    auto out = t.out_targets();
    std::vector<char> reach(n, 0);
    std::queue<NodeId> q;
    for (NodeId id = 0; id < n; ++id)
      if (t.nodes[id].role == NodeRole::Input) {
        reach[id] = 1;
        q.push(id);
      }
    while (!q.empty()) {
      NodeId u = q.front();
      q.pop();
      for (NodeId v : out[u])
        if (!reach[v]) {
          reach[v] = 1;
          q.push(v);
        }
    }
    for (NodeId id = 0; id < n; ++id)
      if (!reach[id] && t.nodes[id].role != NodeRole::Input)
        flag(id, "not reachable from any input");
  }

  // Output reachable from every node (no dead nodes).
  if (t.output >= 0 && t.output < n) {
    auto in = t.in_sources();
    std::vector<char> reach(n, 0);
    std::queue<NodeId> q;
    reach[t.output] = 1;
    q.push(t.output);
    while (!q.empty()) {
      NodeId u = q.front();
      q.pop();
      for (NodeId v : in[u])
        if (!reach[v]) {
          reach[v] = 1;
          q.push(v);
        }
    }
    for (NodeId id = 0; id < n; ++id)
      if (!reach[id]) flag(id, "output not reachable from this node");
  }

  return rep;
}

// Deterministic topological order: ties broken by ascending node id.
// Throws on a cyclic graph.
inline std::vector<NodeId> topological_order(const NetworkTopology& t) {
  const int n = t.node_count();
  std::vector<int> indeg(n, 0);
  auto out = t.out_targets();
  for (const auto& [a, b] : t.edges) {
    if (a < 0 || a >= n || b < 0 || b >= n)
      throw std::invalid_argument("topological_order: edge references unknown node");
    ++indeg[b];
  }
  std::priority_queue<NodeId, std::vector<NodeId>, std::greater<>> ready;
  for (NodeId id = 0; id < n; ++id)
    if (indeg[id] == 0) ready.push(id);
  std::vector<NodeId> order;
  order.reserve(n);
  while (!ready.empty()) {
    NodeId u = ready.top();
    ready.pop();
    order.push_back(u);
    for (NodeId v : out[u])
      if (--indeg[v] == 0) ready.push(v);
  }
  if (static_cast<int>(order.size()) != n)
    throw std::invalid_argument("topological_order: cycle detected");
  return order;
}

// True iff every node except the output feeds exactly one downstream node.
// Requires a valid topology.
inline bool is_tree(const NetworkTopology& t) {
  ValidationReport rep = validate(t);
  if (!rep.ok())
    throw std::invalid_argument("is_tree: topology is invalid:\n" + rep.to_string());
  std::vector<int> outdeg(t.node_count(), 0);
  for (const auto& [a, b] : t.edges) ++outdeg[a];
  for (NodeId id = 0; id < t.node_count(); ++id) {
    if (id == t.output) continue;
    if (outdeg[id] != 1) return false;
  }
  return true;
}

}  // namespace structkan
