#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <string>
#include <vector>

#include "structkan/expr.hpp"
#include "structkan/rng.hpp"

namespace sk = structkan;

namespace {

const std::vector<std::string> kVars{"x1", "x2", "y1", "y2"};

sk::ExprTree parse4(std::string_view text) { return sk::ExprTree::parse(text, kVars); }

}  // namespace

TEST_CASE("evaluation matches hand-computed values", "[expr]") {
  auto z = parse4("x1^2*x2 + y1*y2^2");
  REQUIRE(z.eval(std::vector<double>{1.0, 2.0, 3.0, 4.0}) == 50.0);
  REQUIRE(z.eval(std::vector<double>{1.0, 1.0, 1.0, 1.0}) == 2.0);

  auto zp = parse4("x1*y1*y2 + x1*x2*y2");
  REQUIRE(zp.eval(std::vector<double>{2.0, 1.0, 1.0, 3.0}) == 12.0);

  auto mixed = parse4("2*x1 - 3 + x2^0");
  REQUIRE(mixed.eval(std::vector<double>{5.0, 9.0, 0.0, 0.0}) == 8.0);

  auto nested = parse4("-(x1 - x2)^3");
  REQUIRE(nested.eval(std::vector<double>{1.0, 3.0, 0.0, 0.0}) == 8.0);
}

TEST_CASE("precedence and associativity", "[expr]") {
  std::vector<std::string> vars{"a", "b"};
  auto t = sk::ExprTree::parse("a - b - a", vars);
  REQUIRE(t.eval(std::vector<double>{5.0, 2.0}) == -2.0);

  auto pow_binds = sk::ExprTree::parse("2*a^2", vars);
  REQUIRE(pow_binds.eval(std::vector<double>{3.0, 0.0}) == 18.0);

  auto neg_pow = sk::ExprTree::parse("-a^2", vars);
  REQUIRE(neg_pow.eval(std::vector<double>{3.0, 0.0}) == -9.0);

  auto parens = sk::ExprTree::parse("(a + b)^2", vars);
  REQUIRE(parens.eval(std::vector<double>{1.0, 2.0}) == 9.0);
}

TEST_CASE("exact gradient at a known point", "[expr]") {
  auto z = parse4("x1^2*x2 + y1*y2^2");
  auto g = z.grad(std::vector<double>{1.0, 1.0, 1.0, 1.0});
  REQUIRE(g.size() == 4);
  REQUIRE(g[0] == 2.0);
  REQUIRE(g[1] == 1.0);
  REQUIRE(g[2] == 1.0);
  REQUIRE(g[3] == 2.0);
}

TEST_CASE("gradient agrees with central finite differences", "[expr]") {
  auto z = parse4("x1^2*x2 + y1*y2^2");
  auto zp = parse4("x1*y1*y2 + x1*x2*y2");
  auto odd = parse4("-(x1 - x2)^3 + 0.5*x1*y1 - y2^4");
  sk::Rng rng(7);
  const double h = 1e-5;
  for (const auto* expr : {&z, &zp, &odd}) {
    for (int trial = 0; trial < 100; ++trial) {
      std::vector<double> x(4);
      for (double& v : x) v = rng.uniform(-1.0, 1.0);
      auto g = expr->grad(x);
      for (int j = 0; j < 4; ++j) {
        std::vector<double> lo(x), hi(x);
        lo[j] -= h;
        hi[j] += h;
        double fd = (expr->eval(hi) - expr->eval(lo)) / (2.0 * h);
        double scale = std::max({std::abs(g[j]), std::abs(fd), 1e-2});
        REQUIRE(std::abs(g[j] - fd) / scale < 1e-6);
      }
    }
  }
}

TEST_CASE("parse errors carry the offending position", "[expr]") {
  using sk::ParseError;

  auto check = [](std::string_view text, std::size_t position,
                  std::string_view fragment) {
    try {
      parse4(text);
      FAIL("expected ParseError for: " << text);
    } catch (const ParseError& e) {
      REQUIRE(e.position == position);
      REQUIRE_THAT(e.what(), Catch::Matchers::ContainsSubstring(std::string(fragment)));
      REQUIRE_THAT(e.what(), Catch::Matchers::ContainsSubstring(
                                 "(at position " + std::to_string(position) + ")"));
    }
  };

  check("x1 + * x2", 5, "syntax error");
  check("", 0, "empty expression");
  check("   ", 0, "empty expression");
  check("x1 + q2", 5, "unknown variable 'q2'");
  check("(x1 + x2", 8, "expected ')'");
  check("x1^-2", 3, "exponent must be a non-negative integer");
  check("x1^2.5", 3, "exponent must be a non-negative integer");
  check("x1 x2", 3, "unexpected trailing input");
  check("x1 +", 4, "unexpected end of expression");
}

TEST_CASE("unknown variable message lists the vocabulary", "[expr]") {
  try {
    parse4("w1 + x1");
    FAIL("expected ParseError");
  } catch (const sk::ParseError& e) {
    REQUIRE_THAT(e.what(),
                 Catch::Matchers::ContainsSubstring("valid variables: x1, x2, y1, y2"));
  }
}

TEST_CASE("eval and grad reject dimension mismatches", "[expr]") {
  auto z = parse4("x1 + x2");
  std::vector<double> wrong{1.0, 2.0};
  REQUIRE_THROWS_AS(z.eval(wrong), std::invalid_argument);
  REQUIRE_THROWS_AS(z.grad(wrong), std::invalid_argument);
}

TEST_CASE("infer_variables orders names naturally", "[expr]") {
  auto names = sk::infer_variables("y2*x10 + x2 - x1*y1 + x9");
  REQUIRE(names == std::vector<std::string>{"x1", "x2", "x9", "x10", "y1", "y2"});

  auto empty = sk::infer_variables("1 + 2");
  REQUIRE(empty.empty());
}
