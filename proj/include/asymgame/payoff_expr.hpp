#pragma once

// Running-cost expressions l(x, t, u, v).
//
// Grammar, loosest to tightest binding:
//   expr    := term (('+' | '-') term)*
//   term    := power (('*' | '/') power)*
//   power   := unary ('^' power)?           right associative
//   unary   := '-' unary | primary
//   primary := number | variable | func '(' expr (',' expr)* ')' | '(' expr ')'
// Variables are x1..xN, t, u1..uD, v1..vD. Functions: min, max (two or more
// arguments), pow (two), abs, exp (one).

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "asymgame/errors.hpp"

namespace asymgame {

enum class VarKind { x, t, u, v };
enum class OpKind { add, sub, mul, div, pow, neg, min, max, abs, exp };

struct VariableDims {
  std::size_t x = 0;
  std::size_t u = 0;
  std::size_t v = 0;
};

/// Values bound to the variables of an expression during evaluation.
struct Bindings {
  std::span<const double> x;
  double t = 0.0;
  std::span<const double> u;
  std::span<const double> v;
};

namespace detail {

struct ExprNode {
  enum class Tag { constant, variable, op } tag;
  double value = 0.0;
  VarKind var = VarKind::x;
  std::size_t index = 0;  // 0-based variable index
  OpKind op = OpKind::add;
  std::vector<std::shared_ptr<const ExprNode>> args;
};

using NodePtr = std::shared_ptr<const ExprNode>;

inline std::string format_double(double v) {
  std::array<char, 64> buf{};
  auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

class ExprParser {
 public:
  explicit ExprParser(std::string_view src) : src_(src) {}

  NodePtr parse() {
    auto e = expr();
    skip_ws();
    if (pos_ != src_.size()) throw ParseError("unexpected character '" + std::string(1, src_[pos_]) + "'", pos_);
    return e;
  }

 private:
  static NodePtr make_op(OpKind op, std::vector<NodePtr> args) {
    auto n = std::make_shared<ExprNode>();
    n->tag = ExprNode::Tag::op;
    n->op = op;
    n->args = std::move(args);
    return n;
  }

  void skip_ws() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) {
      if (pos_ >= src_.size()) throw ParseError(std::string("expected '") + c + "' but input ended", pos_);
      throw ParseError(std::string("expected '") + c + "'", pos_);
    }
  }

  NodePtr expr() {
    auto lhs = term();
    for (;;) {
      if (accept('+')) {
        lhs = make_op(OpKind::add, {lhs, term()});
      } else if (accept('-')) {
        lhs = make_op(OpKind::sub, {lhs, term()});
      } else {
        return lhs;
      }
    }
  }

  NodePtr term() {
    auto lhs = power();
    for (;;) {
      if (accept('*')) {
        lhs = make_op(OpKind::mul, {lhs, power()});
      } else if (accept('/')) {
        lhs = make_op(OpKind::div, {lhs, power()});
      } else {
        return lhs;
      }
    }
  }

  NodePtr power() {
    auto base = unary();
    if (accept('^')) return make_op(OpKind::pow, {base, power()});
    return base;
  }

  NodePtr unary() {
    if (accept('-')) return make_op(OpKind::neg, {unary()});
    return primary();
  }

  NodePtr primary() {
    skip_ws();
    if (pos_ >= src_.size()) throw ParseError("expected an operand but input ended", pos_);
    const char c = src_[pos_];
    if (c == '(') {
      ++pos_;
      auto e = expr();
      expect(')');
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c))) return identifier();
    throw ParseError("unexpected character '" + std::string(1, c) + "'", pos_);
  }

  NodePtr number() {
    const std::size_t start = pos_;
    double v = 0.0;
    auto res = std::from_chars(src_.data() + pos_, src_.data() + src_.size(), v);
    if (res.ec != std::errc()) throw ParseError("malformed number", start);
    pos_ = static_cast<std::size_t>(res.ptr - src_.data());
    auto n = std::make_shared<ExprNode>();
    n->tag = ExprNode::Tag::constant;
    n->value = v;
    return n;
  }

  NodePtr identifier() {
    const std::size_t start = pos_;
    while (pos_ < src_.size() && std::isalnum(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    const std::string_view name = src_.substr(start, pos_ - start);

    struct Func {
      std::string_view name;
      OpKind op;
      std::size_t min_arity;
      std::size_t max_arity;
    };
    static constexpr std::array<Func, 5> funcs{{{"min", OpKind::min, 2, 64},
                                                {"max", OpKind::max, 2, 64},
                                                {"pow", OpKind::pow, 2, 2},
                                                {"abs", OpKind::abs, 1, 1},
                                                {"exp", OpKind::exp, 1, 1}}};
    for (const auto& f : funcs) {
      if (f.name != name) continue;
      expect('(');
      std::vector<NodePtr> args{expr()};
      while (accept(',')) args.push_back(expr());
      expect(')');
      if (args.size() < f.min_arity || args.size() > f.max_arity)
        throw ParseError("arity mismatch for " + std::string(name) + ": got " +
                             std::to_string(args.size()) + " arguments",
                         start);
      return make_op(f.op, std::move(args));
    }

    auto n = std::make_shared<ExprNode>();
    n->tag = ExprNode::Tag::variable;
    if (name == "t") {
      n->var = VarKind::t;
      return n;
    }
    if (name.size() >= 2 && (name[0] == 'x' || name[0] == 'u' || name[0] == 'v')) {
      std::size_t idx = 0;
      auto digits = name.substr(1);
      auto res = std::from_chars(digits.data(), digits.data() + digits.size(), idx);
      if (res.ec == std::errc() && res.ptr == digits.data() + digits.size() && idx >= 1 &&
          digits[0] != '0') {
        n->var = name[0] == 'x' ? VarKind::x : name[0] == 'u' ? VarKind::u : VarKind::v;
        n->index = idx - 1;
        return n;
      }
    }
    throw ParseError("unknown identifier '" + std::string(name) + "'", start);
  }

  std::string_view src_;
  std::size_t pos_ = 0;
};

}  // namespace detail

/// Parsed running-cost expression. Immutable and cheap to copy.
class PayoffExpr {
 public:
  static PayoffExpr parse(std::string_view text) {
    return PayoffExpr(detail::ExprParser(text).parse());
  }

  double evaluate(const Bindings& b) const { return eval(*root_, b); }

  double evaluate(std::span<const double> x, double t, std::span<const double> u,
                  std::span<const double> v) const {
    return evaluate(Bindings{x, t, u, v});
  }

  /// Canonical fully parenthesised form; re-parsing it yields an identical tree.
  std::string print() const { return print(*root_); }

  /// Smallest dimensions the expression needs (highest referenced index).
  VariableDims required_dims() const {
    VariableDims d;
    collect_dims(*root_, d);
    return d;
  }

  void check_dims(const VariableDims& declared) const {
    const auto need = required_dims();
    auto fail = [](char name, std::size_t need_dim, std::size_t have) {
      throw ConfigError(std::string("payoff references ") + name + std::to_string(need_dim) +
                        " but only " + std::to_string(have) + " coordinates are declared");
    };
    if (need.x > declared.x) fail('x', need.x, declared.x);
    if (need.u > declared.u) fail('u', need.u, declared.u);
    if (need.v > declared.v) fail('v', need.v, declared.v);
  }

  /// Same expression multiplied by a constant.
  PayoffExpr scaled(double c) const { return binary(OpKind::mul, constant(c), root_); }
  /// Same expression plus a constant.
  PayoffExpr shifted(double c) const { return binary(OpKind::add, root_, constant(c)); }

 private:
  explicit PayoffExpr(detail::NodePtr root) : root_(std::move(root)) {}

  static detail::NodePtr constant(double c) {
    auto n = std::make_shared<detail::ExprNode>();
    n->tag = detail::ExprNode::Tag::constant;
    n->value = c;
    return n;
  }

  static PayoffExpr binary(OpKind op, detail::NodePtr a, detail::NodePtr b) {
    auto n = std::make_shared<detail::ExprNode>();
    n->tag = detail::ExprNode::Tag::op;
    n->op = op;
    n->args = {std::move(a), std::move(b)};
    return PayoffExpr(std::move(n));
  }

  static double lookup(std::span<const double> vals, std::size_t i, char name) {
    if (i >= vals.size())
      throw EvalError(std::string("variable ") + name + std::to_string(i + 1) + " is not bound");
    return vals[i];
  }

  static double eval(const detail::ExprNode& n, const Bindings& b) {
    using Tag = detail::ExprNode::Tag;
    switch (n.tag) {
      case Tag::constant:
        return n.value;
      case Tag::variable:
        switch (n.var) {
          case VarKind::x: return lookup(b.x, n.index, 'x');
          case VarKind::u: return lookup(b.u, n.index, 'u');
          case VarKind::v: return lookup(b.v, n.index, 'v');
          case VarKind::t: return b.t;
        }
        break;
      case Tag::op:
        break;
    }
    auto arg = [&](std::size_t i) { return eval(*n.args[i], b); };
    switch (n.op) {
      case OpKind::add: return arg(0) + arg(1);
      case OpKind::sub: return arg(0) - arg(1);
      case OpKind::mul: return arg(0) * arg(1);
      case OpKind::div: {
        const double den = arg(1);
        if (den == 0.0) throw EvalError("division by zero");
        return arg(0) / den;
      }
      case OpKind::neg: return -arg(0);
      case OpKind::abs: return std::abs(arg(0));
      case OpKind::exp: return finite(std::exp(arg(0)), "exp");
      case OpKind::pow: return finite(std::pow(arg(0), arg(1)), "pow");
      case OpKind::min:
      case OpKind::max: {
        double acc = arg(0);
        for (std::size_t i = 1; i < n.args.size(); ++i) {
          const double v = arg(i);
          acc = n.op == OpKind::min ? std::min(acc, v) : std::max(acc, v);
        }
        return acc;
      }
    }
    throw EvalError("corrupt expression tree");
  }

  static double finite(double v, const char* what) {
    if (!std::isfinite(v)) throw EvalError(std::string(what) + " produced a non-finite value");
    return v;
  }

  static std::string print(const detail::ExprNode& n) {
    using Tag = detail::ExprNode::Tag;
    if (n.tag == Tag::constant) {
      auto s = detail::format_double(n.value);
      return n.value < 0 ? "(" + s + ")" : s;
    }
    if (n.tag == Tag::variable) {
      switch (n.var) {
        case VarKind::t: return "t";
        case VarKind::x: return "x" + std::to_string(n.index + 1);
        case VarKind::u: return "u" + std::to_string(n.index + 1);
        case VarKind::v: return "v" + std::to_string(n.index + 1);
      }
    }
    auto bin = [&](const char* sym) {
      return "(" + print(*n.args[0]) + " " + sym + " " + print(*n.args[1]) + ")";
    };
    auto call = [&](const char* name) {
      std::string s = std::string(name) + "(";
      for (std::size_t i = 0; i < n.args.size(); ++i) s += (i ? ", " : "") + print(*n.args[i]);
      return s + ")";
    };
    switch (n.op) {
      case OpKind::add: return bin("+");
      case OpKind::sub: return bin("-");
      case OpKind::mul: return bin("*");
      case OpKind::div: return bin("/");
      case OpKind::pow: return bin("^");
      case OpKind::neg: return "(-" + print(*n.args[0]) + ")";
      case OpKind::min: return call("min");
      case OpKind::max: return call("max");
      case OpKind::abs: return call("abs");
      case OpKind::exp: return call("exp");
    }
    return {};
  }

  static void collect_dims(const detail::ExprNode& n, VariableDims& d) {
    if (n.tag == detail::ExprNode::Tag::variable) {
      if (n.var == VarKind::x) d.x = std::max(d.x, n.index + 1);
      if (n.var == VarKind::u) d.u = std::max(d.u, n.index + 1);
      if (n.var == VarKind::v) d.v = std::max(d.v, n.index + 1);
    }
    for (const auto& a : n.args) collect_dims(*a, d);
  }

  detail::NodePtr root_;
};

/// Compact sampling domain for constant estimates: an axis-aligned box in x,
/// a time interval and the finite control sets.
struct SampleDomain {
  std::vector<std::pair<double, double>> x_box;
  double t_lo = 0.0;
  double t_hi = 0.0;
  std::vector<std::vector<double>> controls_u;
  std::vector<std::vector<double>> controls_v;
  std::size_t points_per_axis = 33;
};

struct LipschitzEstimate {
  double sup_bound = 0.0;
  double lip_x = 0.0;
  double lip_t = 0.0;
};

/// Sampled estimates of sup|l| and of the Lipschitz constants in x and t.
/// Uses a uniform grid including the box corners; the values are lower
/// bounds of the true constants and only feed test tolerances.
inline LipschitzEstimate lipschitz_bound(const PayoffExpr& e, const SampleDomain& dom) {
  const std::size_t nx = dom.x_box.size();
  const std::size_t axes = nx + 1;
  const std::size_t k = std::max<std::size_t>(dom.points_per_axis, 2);

  std::vector<std::size_t> counts(axes);
  std::vector<double> lo(axes);
  std::vector<double> step(axes, 0.0);
  for (std::size_t a = 0; a < axes; ++a) {
    const auto [l, h] = a < nx ? dom.x_box[a] : std::pair{dom.t_lo, dom.t_hi};
    lo[a] = l;
    counts[a] = h > l ? k : 1;
    if (counts[a] > 1) step[a] = (h - l) / static_cast<double>(k - 1);
  }
  std::size_t total = 1;
  std::vector<std::size_t> stride(axes);
  for (std::size_t a = 0; a < axes; ++a) {
    stride[a] = total;
    total *= counts[a];
  }

  LipschitzEstimate est;
  std::vector<double> vals(total);
  std::vector<double> x(nx);
  std::vector<std::size_t> idx(axes);
  for (const auto& u : dom.controls_u) {
    for (const auto& v : dom.controls_v) {
      for (std::size_t flat = 0; flat < total; ++flat) {
        std::size_t rem = flat;
        for (std::size_t a = 0; a < axes; ++a) {
          idx[a] = rem % counts[a];
          rem /= counts[a];
        }
        for (std::size_t a = 0; a < nx; ++a)
          x[a] = idx[a] + 1 == counts[a] && counts[a] > 1 ? dom.x_box[a].second
                                                          : lo[a] + step[a] * static_cast<double>(idx[a]);
        const double t = idx[nx] + 1 == counts[nx] && counts[nx] > 1
                             ? dom.t_hi
                             : lo[nx] + step[nx] * static_cast<double>(idx[nx]);
        vals[flat] = e.evaluate(x, t, u, v);
        est.sup_bound = std::max(est.sup_bound, std::abs(vals[flat]));
      }
      for (std::size_t flat = 0; flat < total; ++flat) {
        std::size_t rem = flat;
        for (std::size_t a = 0; a < axes; ++a) {
          idx[a] = rem % counts[a];
          rem /= counts[a];
        }
        for (std::size_t a = 0; a < axes; ++a) {
          if (idx[a] + 1 >= counts[a]) continue;
          const double ratio = std::abs(vals[flat + stride[a]] - vals[flat]) / step[a];
          if (a < nx) {
            est.lip_x = std::max(est.lip_x, ratio);
          } else {
            est.lip_t = std::max(est.lip_t, ratio);
          }
        }
      }
    }
  }
  return est;
}

}  // namespace asymgame
