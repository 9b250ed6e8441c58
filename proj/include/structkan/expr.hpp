#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace structkan {

struct ParseError : std::runtime_error {
  std::size_t position;
  ParseError(std::size_t pos, const std::string& msg)
      : std::runtime_error(msg + " (at position " + std::to_string(pos) + ")"),
        position(pos) {}
};

// Parsed arithmetic expression over named input variables.
// Grammar (precedence ^ > unary - > * > +, left-associative):
//   expr   := term (('+' | '-') term)*        a - b parses as a + (-b)
//   term   := unary ('*' unary)*
//   unary  := '-' unary | power
//   power  := atom ('^' non-negative-integer)*
//   atom   := number | identifier | '(' expr ')'
class ExprTree {
 public:
  enum class Op : std::uint8_t { Constant, Variable, Add, Mul, Pow, Neg };

  struct Node {
    Op op;
    double constant = 0.0;  // Constant
    int variable = -1;      // Variable: input index
    std::int64_t exponent = 0;  // Pow
    int a = -1, b = -1;     // child indices
  };

  static ExprTree parse(std::string_view text, std::span<const std::string> variables) {
    Parser p{text, variables};
    ExprTree tree;
    tree.variables_.assign(variables.begin(), variables.end());
    p.tree = &tree;
    p.skip_ws();
    if (p.pos >= text.size()) throw ParseError(0, "empty expression");
    tree.root_ = p.parse_expr();
    p.skip_ws();
    if (p.pos < text.size())
      throw ParseError(p.pos, "unexpected trailing input '" +
                                  std::string(text.substr(p.pos)) + "'");
    return tree;
  }

  double eval(std::span<const double> point) const {
    if (static_cast<int>(point.size()) != variable_count())
      throw std::invalid_argument("ExprTree::eval: point dimension mismatch");
    return eval_node(root_, point);
  }

  // Exact gradient: sum/product/power rules evaluated at the point.
  std::vector<double> grad(std::span<const double> point) const {
    if (static_cast<int>(point.size()) != variable_count())
      throw std::invalid_argument("ExprTree::grad: point dimension mismatch");
    std::vector<double> g(point.size(), 0.0);
    grad_node(root_, point, 1.0, g);
    return g;
  }

  int variable_count() const { return static_cast<int>(variables_.size()); }
  const std::vector<std::string>& variables() const { return variables_; }
  const std::vector<Node>& nodes() const { return nodes_; }
  int root() const { return root_; }

 private:
  std::vector<Node> nodes_;
  std::vector<std::string> variables_;
  int root_ = -1;

  int add_node(Node n) {
    nodes_.push_back(n);
    return static_cast<int>(nodes_.size() - 1);
  }

  double eval_node(int i, std::span<const double> x) const {
    const Node& n = nodes_[i];
    switch (n.op) {
      case Op::Constant: return n.constant;
      case Op::Variable: return x[n.variable];
      case Op::Add: return eval_node(n.a, x) + eval_node(n.b, x);
      case Op::Mul: return eval_node(n.a, x) * eval_node(n.b, x);
      case Op::Neg: return -eval_node(n.a, x);
      case Op::Pow: {
        double base = eval_node(n.a, x);
        double r = 1.0;
        for (std::int64_t k = 0; k < n.exponent; ++k) r *= base;
        return r;
      }
    }
    return 0.0;
  }

  // Reverse-mode: adds seed * d(node)/d(x_j) into g[j].
  void grad_node(int i, std::span<const double> x, double seed,
                 std::vector<double>& g) const {
    const Node& n = nodes_[i];
    switch (n.op) {
      case Op::Constant: return;
      case Op::Variable: g[n.variable] += seed; return;
      case Op::Add:
        grad_node(n.a, x, seed, g);
        grad_node(n.b, x, seed, g);
        return;
      case Op::Mul: {
        const double va = eval_node(n.a, x);
        const double vb = eval_node(n.b, x);
        grad_node(n.a, x, seed * vb, g);
        grad_node(n.b, x, seed * va, g);
        return;
      }
      case Op::Neg: grad_node(n.a, x, -seed, g); return;
      case Op::Pow: {
        if (n.exponent == 0) return;
        const double base = eval_node(n.a, x);
        double r = 1.0;  // base^(exponent-1)
        for (std::int64_t k = 0; k + 1 < n.exponent; ++k) r *= base;
        grad_node(n.a, x, seed * static_cast<double>(n.exponent) * r, g);
        return;
      }
    }
  }

  struct Parser {
    std::string_view text;
    std::span<const std::string> variables;
    ExprTree* tree = nullptr;
    std::size_t pos = 0;

    void skip_ws() {
      while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos])))
        ++pos;
    }

    bool peek_is(char c) {
      skip_ws();
      return pos < text.size() && text[pos] == c;
    }

    int parse_expr() {
      int left = parse_term();
      for (;;) {
        skip_ws();
        if (peek_is('+')) {
          ++pos;
          int right = parse_term();
          left = tree->add_node({Op::Add, 0.0, -1, 0, left, right});
        } else if (peek_is('-')) {
          ++pos;
          int right = parse_term();
          int neg = tree->add_node({Op::Neg, 0.0, -1, 0, right, -1});
          left = tree->add_node({Op::Add, 0.0, -1, 0, left, neg});
        } else {
          return left;
        }
      }
    }

    int parse_term() {
      int left = parse_unary();
      while (peek_is('*')) {
        ++pos;
        int right = parse_unary();
        left = tree->add_node({Op::Mul, 0.0, -1, 0, left, right});
      }
      return left;
    }

    int parse_unary() {
      if (peek_is('-')) {
        ++pos;
        int inner = parse_unary();
        return tree->add_node({Op::Neg, 0.0, -1, 0, inner, -1});
      }
      return parse_power();
    }

    int parse_power() {
      int base = parse_atom();
      while (peek_is('^')) {
        ++pos;
        skip_ws();
        const std::size_t at = pos;
        std::int64_t exponent = 0;
        auto [ptr, ec] = std::from_chars(text.data() + pos, text.data() + text.size(),
                                         exponent);
        const bool followed_by_fraction =
            ec == std::errc() && ptr < text.data() + text.size() && *ptr == '.';
        if (ec != std::errc() || exponent < 0 || followed_by_fraction)
          throw ParseError(at, "exponent must be a non-negative integer");
        pos = static_cast<std::size_t>(ptr - text.data());
        base = tree->add_node({Op::Pow, 0.0, -1, exponent, base, -1});
      }
      return base;
    }

    int parse_atom() {
      skip_ws();
      if (pos >= text.size()) throw ParseError(pos, "unexpected end of expression");
      const char c = text[pos];
      if (c == '(') {
        ++pos;
        int inner = parse_expr();
        if (!peek_is(')')) throw ParseError(pos, "expected ')'");
        ++pos;
        return inner;
      }
      if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
        double value = 0.0;
        auto [ptr, ec] =
            std::from_chars(text.data() + pos, text.data() + text.size(), value);
        if (ec != std::errc()) throw ParseError(pos, "malformed number");
        pos = static_cast<std::size_t>(ptr - text.data());
        return tree->add_node({Op::Constant, value, -1, 0, -1, -1});
      }
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        const std::size_t at = pos;
        std::size_t end = pos;
        while (end < text.size() &&
               (std::isalnum(static_cast<unsigned char>(text[end])) || text[end] == '_'))
          ++end;
        const std::string_view name = text.substr(pos, end - pos);
        pos = end;
        for (std::size_t i = 0; i < variables.size(); ++i)
          if (variables[i] == name)
            return tree->add_node({Op::Variable, 0.0, static_cast<int>(i), 0, -1, -1});
        std::string valid;
        for (std::size_t i = 0; i < variables.size(); ++i) {
          if (i) valid += ", ";
          valid += variables[i];
        }
        throw ParseError(at, "unknown variable '" + std::string(name) +
                                 "' (valid variables: " + valid + ")");
      }
      throw ParseError(pos, std::string("syntax error at '") + c + "'");
    }
  };
};

// Unique identifiers of an expression in natural order (alphabetic prefix,
// then numeric suffix): x1, x2, y1, y2, ..., x10 after x9. Used by the CLI
// to build a default variable vocabulary.
inline std::vector<std::string> infer_variables(std::string_view text) {
  std::vector<std::string> names;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const char c = text[pos];
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t end = pos;
      while (end < text.size() &&
             (std::isalnum(static_cast<unsigned char>(text[end])) || text[end] == '_'))
        ++end;
      std::string name(text.substr(pos, end - pos));
      bool known = false;
      for (const auto& n : names) known = known || n == name;
      if (!known) names.push_back(std::move(name));
      pos = end;
    } else {
      ++pos;
    }
  }
  auto split = [](const std::string& s) {
    std::size_t i = s.size();
    while (i > 0 && std::isdigit(static_cast<unsigned char>(s[i - 1]))) --i;
    long long num = -1;
    if (i < s.size()) num = std::stoll(s.substr(i));
    return std::pair<std::string, long long>(s.substr(0, i), num);
  };
  std::sort(names.begin(), names.end(), [&](const std::string& a, const std::string& b) {
    auto [pa, na] = split(a);
    auto [pb, nb] = split(b);
    if (pa != pb) return pa < pb;
    return na < nb;
  });
  return names;
}

}  // namespace structkan
