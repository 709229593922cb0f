#pragma once

// Arithmetic expressions over x1..xd used for implicit surfaces and custom
// line fields. Evaluation propagates forward-mode duals, one pass per
// coordinate, so gradients are exact up to rounding.
//
// Grammar (lowest to highest precedence):
//   sum     := product (('+' | '-') product)*
//   product := unary (('*' | '/') unary)*
//   unary   := '-' unary | power
//   power   := primary ('^' unary)?          right-associative
//   primary := number | xN | func '(' sum ')' | '(' sum ')'
//   func    := sin | cos | sinh | cosh | exp | sqrt | abs

#include <Eigen/Dense>

#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "caustix/errors.hpp"

namespace caustix {

enum class Op : std::uint8_t { Const, Var, Neg, Add, Sub, Mul, Div, Pow, Sin, Cos, Sinh, Cosh, Exp, Sqrt, Abs };

namespace detail {

struct ExprNode {
  Op op = Op::Const;
  double value = 0.0;  // Const
  int var = 0;         // Var, 0-based
  int lhs = -1;
  int rhs = -1;
  bool constant = true;  // subtree free of variables
};

struct FunctionName {
  std::string_view name;
  Op op;
};

inline constexpr FunctionName kFunctions[] = {
    {"sin", Op::Sin},   {"cos", Op::Cos},   {"sinh", Op::Sinh}, {"cosh", Op::Cosh},
    {"exp", Op::Exp},   {"sqrt", Op::Sqrt}, {"abs", Op::Abs},
};

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace detail

class Expression {
 public:
  using Node = detail::ExprNode;

  /// Nodes are stored children-first; the root is the last node.
  Expression(std::vector<Node> nodes, int dimension)
      : nodes_(std::make_shared<const std::vector<Node>>(std::move(nodes))), dim_(dimension) {}

  int dimension() const { return dim_; }
  std::size_t size() const { return nodes_->size(); }

  std::string to_string() const { return print(root()); }

  double eval(std::span<const double> x) const {
    check_dim(x.size());
    std::vector<double> v(nodes_->size());
    for (std::size_t i = 0; i < nodes_->size(); ++i) v[i] = value_of(static_cast<int>(i), v, x);
    return v.back();
  }

  double eval(const Eigen::VectorXd& x) const { return eval(std::span<const double>(x.data(), x.size())); }

  /// Value and exact gradient.
  std::pair<double, Eigen::VectorXd> eval_with_gradient(const Eigen::VectorXd& x) const {
    check_dim(static_cast<std::size_t>(x.size()));
    const std::span<const double> xs(x.data(), x.size());
    const std::size_t n = nodes_->size();
    std::vector<double> v(n), dv(n);
    Eigen::VectorXd grad(dim_);
    double value = 0.0;
    for (int k = 0; k < dim_; ++k) {
      for (std::size_t i = 0; i < n; ++i) dual_step(static_cast<int>(i), k, v, dv, xs);
      value = v.back();
      grad[k] = dv.back();
    }
    if (dim_ == 0) value = eval(xs);
    return {value, grad};
  }

  friend bool operator==(const Expression& a, const Expression& b) {
    return a.dim_ == b.dim_ && same_tree(a, a.root(), b, b.root());
  }

 private:
  int root() const { return static_cast<int>(nodes_->size()) - 1; }

  void check_dim(std::size_t n) const {
    if (n != static_cast<std::size_t>(dim_))
      throw InputError("expression expects " + std::to_string(dim_) + " coordinates, got " + std::to_string(n));
  }

  static bool same_tree(const Expression& a, int i, const Expression& b, int j) {
    const Node& x = (*a.nodes_)[i];
    const Node& y = (*b.nodes_)[j];
    if (x.op != y.op) return false;
    switch (x.op) {
      case Op::Const: return x.value == y.value;
      case Op::Var: return x.var == y.var;
      default: break;
    }
    if ((x.lhs < 0) != (y.lhs < 0) || (x.rhs < 0) != (y.rhs < 0)) return false;
    if (x.lhs >= 0 && !same_tree(a, x.lhs, b, y.lhs)) return false;
    if (x.rhs >= 0 && !same_tree(a, x.rhs, b, y.rhs)) return false;
    return true;
  }

  std::string print(int i) const {
    const Node& n = (*nodes_)[i];
    auto bin = [&](const char* sym) { return "(" + print(n.lhs) + " " + sym + " " + print(n.rhs) + ")"; };
    switch (n.op) {
      case Op::Const: return detail::format_double(n.value);
      case Op::Var: return "x" + std::to_string(n.var + 1);
      case Op::Neg: return "(-" + print(n.lhs) + ")";
      case Op::Add: return bin("+");
      case Op::Sub: return bin("-");
      case Op::Mul: return bin("*");
      case Op::Div: return bin("/");
      case Op::Pow: return bin("^");
      default: break;
    }
    for (const auto& f : detail::kFunctions)
      if (f.op == n.op) return std::string(f.name) + "(" + print(n.lhs) + ")";
    return "?";
  }

  [[noreturn]] void fail(int i, const std::string& why) const { throw EvalError(print(i), why); }

  double checked(int i, double r) const {
    if (!std::isfinite(r)) fail(i, "non-finite result");
    return r;
  }

  static bool is_integer(double v) { return std::isfinite(v) && std::floor(v) == v && std::abs(v) < 1e9; }

  double value_of(int i, const std::vector<double>& v, std::span<const double> x) const {
    const Node& n = (*nodes_)[i];
    const double a = n.lhs >= 0 ? v[n.lhs] : 0.0;
    const double b = n.rhs >= 0 ? v[n.rhs] : 0.0;
    switch (n.op) {
      case Op::Const: return n.value;
      case Op::Var: return x[n.var];
      case Op::Neg: return -a;
      case Op::Add: return checked(i, a + b);
      case Op::Sub: return checked(i, a - b);
      case Op::Mul: return checked(i, a * b);
      case Op::Div:
        if (b == 0.0) fail(i, "division by zero");
        return checked(i, a / b);
      case Op::Pow:
        if (a < 0.0 && !is_integer(b)) fail(i, "negative base with non-integer exponent");
        if (a == 0.0 && b < 0.0) fail(i, "zero base with negative exponent");
        return checked(i, std::pow(a, b));
      case Op::Sin: return std::sin(a);
      case Op::Cos: return std::cos(a);
      case Op::Sinh: return checked(i, std::sinh(a));
      case Op::Cosh: return checked(i, std::cosh(a));
      case Op::Exp: return checked(i, std::exp(a));
      case Op::Sqrt:
        if (a < 0.0) fail(i, "square root of negative argument " + detail::format_double(a));
        return std::sqrt(a);
      case Op::Abs: return std::abs(a);
    }
    return 0.0;
  }

  void dual_step(int i, int k, std::vector<double>& v, std::vector<double>& dv, std::span<const double> x) const {
    const Node& n = (*nodes_)[i];
    const double a = n.lhs >= 0 ? v[n.lhs] : 0.0;
    const double da = n.lhs >= 0 ? dv[n.lhs] : 0.0;
    const double b = n.rhs >= 0 ? v[n.rhs] : 0.0;
    const double db = n.rhs >= 0 ? dv[n.rhs] : 0.0;
    v[i] = value_of(i, v, x);
    double d = 0.0;
    switch (n.op) {
      case Op::Const: d = 0.0; break;
      case Op::Var: d = n.var == k ? 1.0 : 0.0; break;
      case Op::Neg: d = -da; break;
      case Op::Add: d = da + db; break;
      case Op::Sub: d = da - db; break;
      case Op::Mul: d = da * b + a * db; break;
      case Op::Div: d = (da * b - a * db) / (b * b); break;
      case Op::Pow:
        if ((*nodes_)[n.rhs].constant) {
          if (b == 0.0) {
            d = 0.0;
          } else if (a == 0.0 && b < 1.0 && da != 0.0) {
            fail(i, "power is not differentiable at zero base");
          } else {
            d = da == 0.0 ? 0.0 : b * std::pow(a, b - 1.0) * da;
          }
        } else {
          if (!(a > 0.0)) fail(i, "variable exponent requires a positive base");
          d = v[i] * (db * std::log(a) + b * da / a);
        }
        break;
      case Op::Sin: d = std::cos(a) * da; break;
      case Op::Cos: d = -std::sin(a) * da; break;
      case Op::Sinh: d = std::cosh(a) * da; break;
      case Op::Cosh: d = std::sinh(a) * da; break;
      case Op::Exp: d = v[i] * da; break;
      case Op::Sqrt:
        if (a == 0.0) {
          if (da != 0.0) fail(i, "square root is not differentiable at zero");
          d = 0.0;
        } else {
          d = da / (2.0 * v[i]);
        }
        break;
      case Op::Abs: d = (a > 0.0 ? 1.0 : a < 0.0 ? -1.0 : 0.0) * da; break;
    }
    dv[i] = checked(i, d);
  }

  std::shared_ptr<const std::vector<Node>> nodes_;
  int dim_;
};

namespace detail {

class ExprParser {
 public:
  ExprParser(std::string_view text, int dim) : s_(text), dim_(dim) {}

  Expression run() {
    if (dim_ < 1) throw InputError("expression dimension must be positive");
    skip_ws();
    const int root = sum();
    skip_ws();
    if (pos_ != s_.size()) throw ParseError(pos_, "unexpected '" + std::string(1, s_[pos_]) + "'");
    // Re-emit in post-order so the root is last.
    std::vector<ExprNode> ordered;
    ordered.reserve(nodes_.size());
    emit(root, ordered);
    return Expression(std::move(ordered), dim_);
  }

 private:
  static constexpr int kMaxDepth = 256;
  static constexpr std::size_t kMaxNodes = 20000;

  int emit(int i, std::vector<ExprNode>& out) const {
    ExprNode n = nodes_[i];
    if (n.lhs >= 0) n.lhs = emit(n.lhs, out);
    if (n.rhs >= 0) n.rhs = emit(n.rhs, out);
    out.push_back(n);
    return static_cast<int>(out.size()) - 1;
  }

  int add(Op op, int lhs = -1, int rhs = -1) {
    if (nodes_.size() >= kMaxNodes) throw ParseError(pos_, "expression too large");
    ExprNode n;
    n.op = op;
    n.lhs = lhs;
    n.rhs = rhs;
    n.constant = (lhs < 0 || nodes_[lhs].constant) && (rhs < 0 || nodes_[rhs].constant);
    nodes_.push_back(n);
    return static_cast<int>(nodes_.size()) - 1;
  }

  void skip_ws() {
    while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t' || s_[pos_] == '\n' || s_[pos_] == '\r'))
      ++pos_;
  }

  bool eat(char c) {
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  struct DepthGuard {
    explicit DepthGuard(ExprParser& p) : p_(p) {
      if (++p_.depth_ > kMaxDepth) throw ParseError(p_.pos_, "expression nested too deeply");
    }
    ~DepthGuard() { --p_.depth_; }
    ExprParser& p_;
  };

  int sum() {
    DepthGuard guard(*this);
    int lhs = product();
    for (;;) {
      if (eat('+')) {
        lhs = add(Op::Add, lhs, product());
      } else if (eat('-')) {
        lhs = add(Op::Sub, lhs, product());
      } else {
        return lhs;
      }
    }
  }

  int product() {
    int lhs = unary();
    for (;;) {
      if (eat('*')) {
        lhs = add(Op::Mul, lhs, unary());
      } else if (eat('/')) {
        lhs = add(Op::Div, lhs, unary());
      } else {
        return lhs;
      }
    }
  }

  int unary() {
    DepthGuard guard(*this);
    if (eat('-')) return add(Op::Neg, unary());
    return power();
  }

  int power() {
    const int base = primary();
    if (eat('^')) return add(Op::Pow, base, unary());
    return base;
  }

  static bool is_ident_start(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_'; }
  static bool is_digit(char c) { return c >= '0' && c <= '9'; }

  int primary() {
    skip_ws();
    if (pos_ >= s_.size()) throw ParseError(pos_, "unexpected end of input");
    const char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      const int inner = sum();
      if (!eat(')')) throw ParseError(pos_, "expected ')'");
      return inner;
    }
    if (is_digit(c) || c == '.') return number();
    if (is_ident_start(c)) return identifier();
    throw ParseError(pos_, "unexpected '" + std::string(1, c) + "'");
  }

  int number() {
    const std::size_t start = pos_;
    while (pos_ < s_.size() && is_digit(s_[pos_])) ++pos_;
    if (pos_ < s_.size() && s_[pos_] == '.') {
      ++pos_;
      while (pos_ < s_.size() && is_digit(s_[pos_])) ++pos_;
    }
    if (pos_ < s_.size() && (s_[pos_] == 'e' || s_[pos_] == 'E')) {
      std::size_t look = pos_ + 1;
      if (look < s_.size() && (s_[look] == '+' || s_[look] == '-')) ++look;
      if (look < s_.size() && is_digit(s_[look])) {
        pos_ = look;
        while (pos_ < s_.size() && is_digit(s_[pos_])) ++pos_;
      }
    }
    double v = 0.0;
    const auto res = std::from_chars(s_.data() + start, s_.data() + pos_, v);
    if (res.ec != std::errc() || res.ptr != s_.data() + pos_ || !std::isfinite(v))
      throw ParseError(start, "malformed number");
    const int id = add(Op::Const);
    nodes_[id].value = v;
    return id;
  }

  int identifier() {
    const std::size_t start = pos_;
    while (pos_ < s_.size() && (is_ident_start(s_[pos_]) || is_digit(s_[pos_]))) ++pos_;
    const std::string_view name = s_.substr(start, pos_ - start);

    if (name.size() > 1 && name[0] == 'x') {
      bool digits = true;
      for (char ch : name.substr(1)) digits = digits && is_digit(ch);
      if (digits) {
        if (name.size() > 10) throw InputError("variable index out of range: " + std::string(name));
        const int index = std::stoi(std::string(name.substr(1)));
        if (index < 1 || index > dim_)
          throw InputError("variable " + std::string(name) + " out of range for dimension " + std::to_string(dim_));
        const int id = add(Op::Var);
        nodes_[id].var = index - 1;
        nodes_[id].constant = false;
        return id;
      }
    }
    for (const auto& f : kFunctions) {
      if (f.name == name) {
        if (!eat('(')) throw ParseError(pos_, "expected '(' after " + std::string(name));
        const int arg = sum();
        if (!eat(')')) throw ParseError(pos_, "expected ')'");
        return add(f.op, arg);
      }
    }
    throw ParseError(start, "unknown identifier '" + std::string(name) + "'");
  }

  std::string_view s_;
  int dim_;
  std::size_t pos_ = 0;
  int depth_ = 0;
  std::vector<ExprNode> nodes_;
};

}  // namespace detail

inline Expression parse_expression(std::string_view text, int dimension) {
  return detail::ExprParser(text, dimension).run();
}

inline std::pair<double, Eigen::VectorXd> eval_with_gradient(const Expression& e, const Eigen::VectorXd& x) {
  return e.eval_with_gradient(x);
}

}  // namespace caustix
