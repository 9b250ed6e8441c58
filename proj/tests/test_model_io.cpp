#include <catch2/catch_amalgamated.hpp>

#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "structkan/model.hpp"
#include "structkan/network.hpp"
#include "structkan/rng.hpp"
#include "structkan/train_boosted.hpp"

namespace sk = structkan;

namespace {

sk::NetworkTopology two_branch() {
  sk::NetworkTopology t;
  t.input_dim = 4;
  for (int i = 0; i < 4; ++i) t.nodes.push_back(sk::NodeKind::input(i));
  t.nodes.push_back(sk::NodeKind::black_box(2));
  t.nodes.push_back(sk::NodeKind::black_box(2));
  t.nodes.push_back(sk::NodeKind::black_box(2));
  t.edges = {{0, 4}, {1, 4}, {2, 5}, {3, 5}, {4, 6}, {5, 6}};
  t.output = 6;
  return t;
}

sk::NetworkModel jittered_smooth_model() {
  sk::NetworkTopology t;
  t.input_dim = 2;
  t.nodes = {sk::NodeKind::input(0), sk::NodeKind::input(1), sk::NodeKind::univariate(),
             sk::NodeKind::univariate(), sk::NodeKind::linear()};
  t.edges = {{0, 2}, {1, 3}, {2, 4}, {3, 4}};
  t.output = 4;
  sk::NetworkModel m{t, sk::default_params(t)};
  sk::Rng rng(55);
  for (auto& p : m.params) {
    if (auto* sp = std::get_if<sk::SplineParams>(&p)) {
      for (double& c : sp->spline.coefficients()) c = rng.uniform(-1.0, 1.0);
    } else if (auto* lp = std::get_if<sk::LinearParams>(&p)) {
      for (double& w : lp->weights) w = rng.uniform(-1.0, 1.0);
      lp->bias = rng.uniform(-1.0, 1.0);
    }
  }
  return m;
}

sk::NetworkModel trained_boosted_model() {
  std::vector<std::string> vars{"x1", "x2", "y1", "y2"};
  auto expr = sk::ExprTree::parse("x1^2*x2 + y1*y2^2", vars);
  auto split = sk::make_train_val(expr, 200, 50, 3);
  sk::EngineConfig config;
  config.rounds = 4;
  return sk::train_boosted(two_branch(), split.train, split.val, config).model;
}

sk::Matrix probe_inputs(int n, int dim) {
  sk::Matrix x(n, dim);
  sk::Rng rng(66);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < dim; ++c) x(r, c) = rng.uniform(-1.5, 1.5);
  return x;
}

void require_schema_error(const std::string& text, std::string_view fragment) {
  try {
    sk::model_from_string(text);
    FAIL("expected a schema error containing: " << fragment);
  } catch (const std::invalid_argument& e) {
    REQUIRE_THAT(e.what(), Catch::Matchers::ContainsSubstring(std::string(fragment)));
  }
}

// Minimal valid document used as the base for corruption tests.
const char* kMinimalDoc = R"({
  "input_dim": 1,
  "nodes": [
    {"id": 0, "kind": "input", "params": {"index": 0}},
    {"id": 1, "kind": "univariate"}
  ],
  "edges": [[0, 1]],
  "output": 1
})";

}  // namespace

TEST_CASE("serialization round-trips byte for byte", "[model]") {
  auto check_roundtrip = [](const sk::NetworkModel& m, int dim) {
    const std::string once = sk::model_to_string(m);
    auto parsed = sk::model_from_string(once);
    REQUIRE(sk::model_to_string(parsed) == once);

    auto x = probe_inputs(32, dim);
    REQUIRE(sk::predict(parsed, x) == sk::predict(m, x));
  };

  sk::NetworkModel defaults{two_branch(), sk::default_params(two_branch())};
  check_roundtrip(defaults, 4);
  check_roundtrip(jittered_smooth_model(), 2);
  check_roundtrip(trained_boosted_model(), 4);
}

TEST_CASE("the minimal document parses and uses the default spline", "[model]") {
  auto m = sk::model_from_string(kMinimalDoc);
  REQUIRE(m.topology.input_dim == 1);
  REQUIRE(m.topology.output == 1);
  const auto& s = std::get<sk::SplineParams>(m.params[1]).spline;
  REQUIRE(s.intervals() == 8);
  REQUIRE(s.coefficient_count() == 11);
}

TEST_CASE("unknown fields are rejected at every level", "[model]") {
  require_schema_error(R"({"input_dim": 1, "nodes": [], "edges": [], "output": 0,
                           "extra": 1})",
                       "unknown field 'extra'");
  require_schema_error(R"({"input_dim": 1,
                           "nodes": [{"id": 0, "kind": "input",
                                      "params": {"index": 0}, "note": "hi"}],
                           "edges": [], "output": 0})",
                       "unknown field 'note'");
  require_schema_error(R"({"input_dim": 1,
                           "nodes": [{"id": 0, "kind": "input",
                                      "params": {"index": 0, "label": "x"}}],
                           "edges": [], "output": 0})",
                       "unknown field 'label'");
  require_schema_error(R"({"input_dim": 2,
      "nodes": [{"id": 0, "kind": "input", "params": {"index": 0}},
                {"id": 1, "kind": "input", "params": {"index": 1}},
                {"id": 2, "kind": "blackbox",
                 "params": {"arity": 2, "color": "red"}}],
      "edges": [[0, 2], [1, 2]], "output": 2})",
                       "unknown field 'color'");
}

TEST_CASE("missing and malformed pieces are schema errors", "[model]") {
  require_schema_error(R"({"input_dim": 1, "nodes": [], "edges": []})",
                       "missing field 'output'");
  require_schema_error(R"({"input_dim": 1,
                           "nodes": [{"kind": "input", "params": {"index": 0}}],
                           "edges": [], "output": 0})",
                       "missing field 'id'");
  require_schema_error(R"({"input_dim": 1,
                           "nodes": [{"id": 0, "kind": "gate"}],
                           "edges": [], "output": 0})",
                       "unknown kind 'gate'");
  require_schema_error(R"({"input_dim": 1,
                           "nodes": [{"id": 0, "kind": "input", "params": {"index": 0}},
                                     {"id": 0, "kind": "univariate"}],
                           "edges": [[0, 1]], "output": 1})",
                       "duplicate node id");
  require_schema_error(R"({"input_dim": 1,
                           "nodes": [{"id": 0, "kind": "input", "params": {"index": 0}},
                                     {"id": 5, "kind": "univariate"}],
                           "edges": [[0, 5]], "output": 1})",
                       "node ids must be dense");
  require_schema_error(R"({"input_dim": 1,
                           "nodes": [{"id": 0, "kind": "input", "params": {"index": 0}}],
                           "edges": [[0]], "output": 0})",
                       "each edge must be [from, to]");
  require_schema_error(R"({"input_dim": 2,
      "nodes": [{"id": 0, "kind": "input", "params": {"index": 0}},
                {"id": 1, "kind": "input", "params": {"index": 1}},
                {"id": 2, "kind": "blackbox"}],
      "edges": [[0, 2], [1, 2]], "output": 2})",
                       "blackbox node requires params with 'arity'");
}

TEST_CASE("parameter shapes are checked", "[model]") {
  require_schema_error(R"({"input_dim": 1,
      "nodes": [{"id": 0, "kind": "input", "params": {"index": 0}},
                {"id": 1, "kind": "univariate",
                 "params": {"domain": [-1.0, 1.0], "intervals": 8,
                            "coefficients": [1.0, 2.0]}}],
      "edges": [[0, 1]], "output": 1})",
                       "expected 11 coefficients, got 2");
  require_schema_error(R"({"input_dim": 2,
      "nodes": [{"id": 0, "kind": "input", "params": {"index": 0}},
                {"id": 1, "kind": "input", "params": {"index": 1}},
                {"id": 2, "kind": "linear",
                 "params": {"weights": [1.0], "bias": 0.0}}],
      "edges": [[0, 2], [1, 2]], "output": 2})",
                       "expected 2 weights, got 1");
  require_schema_error(R"({"input_dim": 1,
      "nodes": [{"id": 0, "kind": "input", "params": {"index": 0}},
                {"id": 1, "kind": "univariate",
                 "params": {"domain": [1.0, -1.0], "intervals": 8,
                            "coefficients": [0,0,0,0,0,0,0,0,0,0,0]}}],
      "edges": [[0, 1]], "output": 1})",
                       "domain must satisfy lo < hi");
  require_schema_error(R"({"input_dim": 2,
      "nodes": [{"id": 0, "kind": "input", "params": {"index": 0}},
                {"id": 1, "kind": "input", "params": {"index": 1}},
                {"id": 2, "kind": "blackbox",
                 "params": {"arity": 2, "shrinkage": 1.5}}],
      "edges": [[0, 2], [1, 2]], "output": 2})",
                       "shrinkage must be in (0, 1]");
}

TEST_CASE("embedded trees are validated", "[model]") {
  const char* base = R"({"input_dim": 2,
      "nodes": [{"id": 0, "kind": "input", "params": {"index": 0}},
                {"id": 1, "kind": "input", "params": {"index": 1}},
                {"id": 2, "kind": "blackbox",
                 "params": {"arity": 2, "trees": [%TREE%]}}],
      "edges": [[0, 2], [1, 2]], "output": 2})";
  auto with_tree = [&](const std::string& tree) {
    std::string doc = base;
    return doc.replace(doc.find("%TREE%"), 6, tree);
  };

  require_schema_error(
      with_tree(R"({"max_depth": 1, "min_leaf_count": 1, "nodes": []})"),
      "'nodes' must be a non-empty array");
  require_schema_error(
      with_tree(R"({"max_depth": 1, "min_leaf_count": 1,
                    "nodes": [{"feature": 0, "threshold": 0.0,
                               "left": 1, "right": 7},
                              {"value": 1.0}, {"value": 2.0}]})"),
      "child index out of range");
  require_schema_error(
      with_tree(R"({"max_depth": 1, "min_leaf_count": 1,
                    "nodes": [{"feature": -2, "threshold": 0.0,
                               "left": 1, "right": 2},
                              {"value": 1.0}, {"value": 2.0}]})"),
      "split feature must be >= 0");
  require_schema_error(
      with_tree(R"({"max_depth": 1, "min_leaf_count": 1,
                    "nodes": [{"value": 1.0, "color": "blue"}]})"),
      "unknown field 'color'");

  // A valid embedded tree must survive the round trip and predict.
  auto ok = sk::model_from_string(with_tree(
      R"({"max_depth": 1, "min_leaf_count": 1,
          "nodes": [{"feature": 0, "threshold": 0.0, "left": 1, "right": 2},
                    {"value": -1.0}, {"value": 1.0}]})"));
  sk::Matrix x(2, 2);
  x(0, 0) = -0.5;
  x(1, 0) = 0.5;
  auto out = sk::predict(ok, x);
  REQUIRE(out[0] == Catch::Approx(-0.1));  // shrinkage 0.1 default
  REQUIRE(out[1] == Catch::Approx(0.1));
}

TEST_CASE("the embedded topology must validate", "[model]") {
  require_schema_error(R"({"input_dim": 1,
      "nodes": [{"id": 0, "kind": "input", "params": {"index": 0}},
                {"id": 1, "kind": "univariate"}],
      "edges": [[0, 1], [1, 0]], "output": 1})",
                       "invalid topology");
  require_schema_error(R"({"input_dim": 1,
      "nodes": [{"id": 0, "kind": "input", "params": {"index": 0}},
                {"id": 1, "kind": "univariate"}],
      "edges": [], "output": 1})",
                       "invalid topology");
}

TEST_CASE("malformed JSON reports a position", "[model]") {
  try {
    sk::model_from_string("{\"input_dim\": 1, \"nodes\": [");
    FAIL("expected a parse failure");
  } catch (const std::invalid_argument& e) {
    REQUIRE_THAT(e.what(), Catch::Matchers::ContainsSubstring("model schema:"));
    REQUIRE_THAT(e.what(), Catch::Matchers::ContainsSubstring("parse error"));
  }
}
