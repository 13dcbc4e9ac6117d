#pragma once

// The game model: types with a prior, finite control sets, and the one-shot
// non-revealing game whose value is the Hamiltonian
//
//   H(t, p) = min over mixed u  max over v  sum_i p_i l(x_i, t, u, v).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "asymgame/detail/dense_lp.hpp"
#include "asymgame/errors.hpp"
#include "asymgame/measures.hpp"
#include "asymgame/payoff_expr.hpp"

namespace asymgame {

using PayoffMatrix = detail::DenseMatrix;

/// A probability vector over a fixed finite support (a point of the simplex).
class Belief {
 public:
  static constexpr double kSumTol = 1e-12;

  Belief() = default;
  explicit Belief(std::vector<double> w) : w_(std::move(w)) {
    if (w_.empty()) throw ConfigError("belief: empty weight vector");
    double s = 0.0;
    for (double x : w_) {
      if (!(x >= 0.0 && x <= 1.0)) throw ConfigError("belief: component outside [0,1]");
      s += x;
    }
    if (std::abs(s - 1.0) > kSumTol) throw ConfigError("belief: weights sum to " + std::to_string(s));
  }

  /// Rescales a nonnegative vector to unit mass.
  static Belief normalized(std::vector<double> w) {
    double s = 0.0;
    for (double x : w) s += x;
    if (!(s > 0.0)) throw ConfigError("belief: zero total mass");
    for (double& x : w) x /= s;
    return Belief(std::move(w));
  }

  static Belief vertex(std::size_t i, std::size_t dim) {
    std::vector<double> w(dim, 0.0);
    w.at(i) = 1.0;
    return Belief(std::move(w));
  }

  std::size_t size() const noexcept { return w_.size(); }
  double operator[](std::size_t i) const { return w_[i]; }
  const std::vector<double>& weights() const noexcept { return w_; }

  /// Measure sum_i p_i delta_{x_i} on the given type points.
  DiscreteMeasure induced_measure(const std::vector<Point>& types) const {
    return DiscreteMeasure(types, w_);
  }

  friend bool operator==(const Belief&, const Belief&) = default;

 private:
  std::vector<double> w_;
};

/// Probability vector over a finite control set.
class MixedAction {
 public:
  static constexpr double kSumTol = 1e-12;

  MixedAction() = default;
  explicit MixedAction(std::vector<double> p) : p_(std::move(p)) {
    double s = 0.0;
    for (double x : p_) {
      if (!(x >= 0.0)) throw ConfigError("mixed action: negative probability");
      s += x;
    }
    if (p_.empty() || std::abs(s - 1.0) > kSumTol)
      throw ConfigError("mixed action: probabilities sum to " + std::to_string(s));
  }

  static MixedAction pure(std::size_t i, std::size_t n) {
    std::vector<double> p(n, 0.0);
    p.at(i) = 1.0;
    return MixedAction(std::move(p));
  }

  std::size_t size() const noexcept { return p_.size(); }
  double operator[](std::size_t i) const { return p_[i]; }
  const std::vector<double>& probabilities() const noexcept { return p_; }

  bool is_pure() const {
    return std::count_if(p_.begin(), p_.end(), [](double x) { return x > 0.0; }) == 1;
  }

 private:
  std::vector<double> p_;
};

struct GameSpec {
  std::vector<Point> type_points;
  Belief prior;
  std::vector<Point> controls_u;
  std::vector<Point> controls_v;
  PayoffExpr payoff = PayoffExpr::parse("0");
  double horizon = 1.0;
  std::size_t time_steps = 1;
  std::size_t grid_resolution = 1;

  std::size_t num_types() const noexcept { return type_points.size(); }
  double tau() const { return horizon / static_cast<double>(time_steps); }
  /// Time of layer k on the uniform grid t_k = k T / n, with t_0 = 0.
  double time(std::size_t k) const {
    return k == time_steps ? horizon
                           : horizon * static_cast<double>(k) / static_cast<double>(time_steps);
  }

  void validate() const {
    if (type_points.empty()) throw ConfigError("game: at least one type is required");
    if (controls_u.empty() || controls_v.empty())
      throw ConfigError("game: both control sets must be non-empty");
    if (!(horizon > 0.0)) throw ConfigError("game: horizon must be positive");
    if (time_steps < 1) throw ConfigError("game: time_steps must be positive");
    if (grid_resolution < 1) throw ConfigError("game: grid_resolution must be positive");
    if (prior.size() != type_points.size())
      throw ConfigError("game: prior has " + std::to_string(prior.size()) + " weights for " +
                        std::to_string(type_points.size()) + " types");
    auto same_dim = [](const std::vector<Point>& pts, const char* what) {
      for (const auto& p : pts)
        if (p.size() != pts.front().size())
          throw ConfigError(std::string("game: inconsistent coordinate count in ") + what);
    };
    same_dim(type_points, "types");
    same_dim(controls_u, "controls_u");
    same_dim(controls_v, "controls_v");
    payoff.check_dims({type_points.front().size(), controls_u.front().size(),
                       controls_v.front().size()});
  }
};

/// l(x_i, t, u, v) for every type i, as one |U| x |V| matrix per type.
inline std::vector<PayoffMatrix> payoff_tensor(const GameSpec& spec, double t) {
  std::vector<PayoffMatrix> out;
  out.reserve(spec.num_types());
  for (const auto& x : spec.type_points) {
    PayoffMatrix m(spec.controls_u.size(), spec.controls_v.size());
    for (std::size_t a = 0; a < spec.controls_u.size(); ++a)
      for (std::size_t b = 0; b < spec.controls_v.size(); ++b)
        m(a, b) = spec.payoff.evaluate(x, t, spec.controls_u[a], spec.controls_v[b]);
    out.push_back(std::move(m));
  }
  return out;
}

inline PayoffMatrix payoff_matrix(const std::vector<PayoffMatrix>& tensor, const Belief& p) {
  PayoffMatrix a(tensor.front().rows(), tensor.front().cols());
  for (std::size_t r = 0; r < a.rows(); ++r)
    for (std::size_t c = 0; c < a.cols(); ++c) {
      double s = 0.0;
      for (std::size_t i = 0; i < tensor.size(); ++i) s += p[i] * tensor[i](r, c);
      a(r, c) = s;
    }
  return a;
}

/// A(u, v) = sum_i p_i l(x_i, t, u, v).
inline PayoffMatrix payoff_matrix(const GameSpec& spec, double t, const Belief& p) {
  return payoff_matrix(payoff_tensor(spec, t), p);
}

struct MatrixGameSolution {
  double value = 0.0;
  MixedAction u_star;  // row player, minimizing
  MixedAction v_star;  // column player, maximizing
};

/// Payoff of each pure column against a mixed row action.
inline std::vector<double> column_payoffs(const PayoffMatrix& a, const MixedAction& u) {
  std::vector<double> out(a.cols(), 0.0);
  for (std::size_t c = 0; c < a.cols(); ++c)
    for (std::size_t r = 0; r < a.rows(); ++r) out[c] += u[r] * a(r, c);
  return out;
}

inline std::vector<double> row_payoffs(const PayoffMatrix& a, const MixedAction& v) {
  std::vector<double> out(a.rows(), 0.0);
  for (std::size_t r = 0; r < a.rows(); ++r)
    for (std::size_t c = 0; c < a.cols(); ++c) out[r] += v[c] * a(r, c);
  return out;
}

namespace detail {

// Shifted LP for the row player: with A' = A - min(A) + 1 > 0,
//   max sum x' s.t. A'^T x' <= 1, x' >= 0, and u* = x' / sum x'.
inline MixedAction solve_row_player(const PayoffMatrix& shifted) {
  const std::size_t nu = shifted.rows();
  const std::size_t nv = shifted.cols();
  DenseMatrix lp(nv, nu + nv);
  std::vector<double> b(nv, 1.0);
  std::vector<double> c(nu + nv, 0.0);
  for (std::size_t col = 0; col < nv; ++col) {
    for (std::size_t r = 0; r < nu; ++r) lp(col, r) = shifted(r, col);
    lp(col, nu + col) = 1.0;
  }
  for (std::size_t r = 0; r < nu; ++r) c[r] = -1.0;
  const auto sol = DenseSimplex::minimize(lp, b, c);
  double total = 0.0;
  for (std::size_t r = 0; r < nu; ++r) total += sol.x[r];
  std::vector<double> u(nu);
  for (std::size_t r = 0; r < nu; ++r) u[r] = sol.x[r] / total;
  return MixedAction(std::move(u));
}

// Column player: min sum y' s.t. A' y' >= 1, y' >= 0, and v* = y' / sum y'.
inline MixedAction solve_column_player(const PayoffMatrix& shifted) {
  const std::size_t nu = shifted.rows();
  const std::size_t nv = shifted.cols();
  DenseMatrix lp(nu, nv + nu);
  std::vector<double> b(nu, 1.0);
  std::vector<double> c(nv + nu, 0.0);
  for (std::size_t r = 0; r < nu; ++r) {
    for (std::size_t col = 0; col < nv; ++col) lp(r, col) = shifted(r, col);
    lp(r, nv + r) = -1.0;
  }
  for (std::size_t col = 0; col < nv; ++col) c[col] = 1.0;
  const auto sol = DenseSimplex::minimize(lp, b, c);
  double total = 0.0;
  for (std::size_t col = 0; col < nv; ++col) total += sol.x[col];
  std::vector<double> v(nv);
  for (std::size_t col = 0; col < nv; ++col) v[col] = sol.x[col] / total;
  return MixedAction(std::move(v));
}

}  // namespace detail

/// Mixed-strategy solution of a finite zero-sum matrix game (row player minimizes).
/// The reported value is the guarantee of u_star, max_v (u_star^T A)_v.
inline MatrixGameSolution solve_matrix_game(const PayoffMatrix& a) {
  if (a.rows() == 0 || a.cols() == 0) throw ConfigError("matrix game: empty payoff matrix");
  double lo = std::numeric_limits<double>::infinity();
  for (std::size_t r = 0; r < a.rows(); ++r)
    for (std::size_t c = 0; c < a.cols(); ++c) lo = std::min(lo, a(r, c));
  PayoffMatrix shifted(a.rows(), a.cols());
  for (std::size_t r = 0; r < a.rows(); ++r)
    for (std::size_t c = 0; c < a.cols(); ++c) shifted(r, c) = a(r, c) - lo + 1.0;

  MatrixGameSolution sol;
  sol.u_star = detail::solve_row_player(shifted);
  sol.v_star = detail::solve_column_player(shifted);
  const auto cols = column_payoffs(a, sol.u_star);
  sol.value = *std::max_element(cols.begin(), cols.end());
  return sol;
}

inline MatrixGameSolution hamiltonian(const GameSpec& spec, double t, const Belief& p) {
  return solve_matrix_game(payoff_matrix(spec, t, p));
}

enum class StrategyClass { pure, mixed };

/// Upper minus lower value of the matrix game over the given strategy class.
inline double isaacs_gap(const PayoffMatrix& a, StrategyClass mode) {
  if (mode == StrategyClass::pure) {
    double minimax = std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < a.rows(); ++r) {
      double row_max = -std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < a.cols(); ++c) row_max = std::max(row_max, a(r, c));
      minimax = std::min(minimax, row_max);
    }
    double maximin = -std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < a.cols(); ++c) {
      double col_min = std::numeric_limits<double>::infinity();
      for (std::size_t r = 0; r < a.rows(); ++r) col_min = std::min(col_min, a(r, c));
      maximin = std::max(maximin, col_min);
    }
    return minimax - maximin;
  }
  const auto sol = solve_matrix_game(a);
  const auto rows = row_payoffs(a, sol.v_star);
  const double lower = *std::min_element(rows.begin(), rows.end());
  return std::max(0.0, sol.value - lower);
}

inline double isaacs_gap(const GameSpec& spec, double t, const Belief& p, StrategyClass mode) {
  return isaacs_gap(payoff_matrix(spec, t, p), mode);
}

/// Lowest-index pure column maximizing the payoff against `u`. Payoffs within
/// 1e-12 (relative) of the maximum count as ties.
inline std::size_t best_response_index(const PayoffMatrix& a, const MixedAction& u) {
  const auto cols = column_payoffs(a, u);
  const double best = *std::max_element(cols.begin(), cols.end());
  const double slack = 1e-12 * (1.0 + std::abs(best));
  for (std::size_t c = 0; c < cols.size(); ++c)
    if (cols[c] >= best - slack) return c;
  return 0;
}

inline MixedAction best_response_v(const GameSpec& spec, double t, const MixedAction& u,
                                   const Belief& p) {
  return MixedAction::pure(best_response_index(payoff_matrix(spec, t, p), u),
                           spec.controls_v.size());
}

}  // namespace asymgame
