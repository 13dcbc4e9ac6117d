#pragma once

// Finitely supported probability measures on R^N, the Wasserstein-1
// (Monge-Kantorovich) distance and its optimal couplings.

#include <cmath>
#include <cstddef>
#include <numeric>
#include <string>
#include <vector>

#include "asymgame/detail/dense_lp.hpp"
#include "asymgame/errors.hpp"

namespace asymgame {

using Point = std::vector<double>;

inline double euclidean_distance(const Point& a, const Point& b) {
  double s = 0.0;
  for (std::size_t d = 0; d < a.size(); ++d) s += (a[d] - b[d]) * (a[d] - b[d]);
  return std::sqrt(s);
}

/// Probability measure with finite support. Identical support points are
/// merged (weights added) on construction, so atoms are pairwise distinct.
class DiscreteMeasure {
 public:
  static constexpr double kMassTol = 1e-12;

  DiscreteMeasure(std::vector<Point> support, std::vector<double> weights) {
    if (support.empty()) throw ConfigError("measure: empty support");
    if (support.size() != weights.size())
      throw ConfigError("measure: support and weights differ in length");
    const std::size_t dim = support.front().size();
    double total = 0.0;
    for (std::size_t i = 0; i < support.size(); ++i) {
      if (support[i].size() != dim) throw ConfigError("measure: inconsistent point dimensions");
      if (!(weights[i] >= 0.0)) throw ConfigError("measure: negative weight");
      total += weights[i];
    }
    if (std::abs(total - 1.0) > kMassTol)
      throw ConfigError("measure: weights sum to " + std::to_string(total));

    for (std::size_t i = 0; i < support.size(); ++i) {
      std::size_t j = 0;
      while (j < support_.size() && support_[j] != support[i]) ++j;
      if (j == support_.size()) {
        support_.push_back(std::move(support[i]));
        weights_.push_back(weights[i]);
      } else {
        weights_[j] += weights[i];
      }
    }
  }

  static DiscreteMeasure dirac(Point x) { return DiscreteMeasure({std::move(x)}, {1.0}); }

  const std::vector<Point>& support() const noexcept { return support_; }
  const std::vector<double>& weights() const noexcept { return weights_; }
  std::size_t size() const noexcept { return support_.size(); }
  std::size_t dimension() const noexcept { return support_.front().size(); }

 private:
  std::vector<Point> support_;
  std::vector<double> weights_;
};

/// Transport plan between two measures; plan[i][j] is the mass moved from
/// row atom i to column atom j.
struct Coupling {
  DiscreteMeasure row_measure;
  DiscreteMeasure col_measure;
  std::vector<std::vector<double>> plan;

  double cost() const {
    double c = 0.0;
    for (std::size_t i = 0; i < plan.size(); ++i)
      for (std::size_t j = 0; j < plan[i].size(); ++j)
        c += plan[i][j] * euclidean_distance(row_measure.support()[i], col_measure.support()[j]);
    return c;
  }
};

inline double second_moment(const DiscreteMeasure& m) {
  double s = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) {
    double sq = 0.0;
    for (double c : m.support()[i]) sq += c * c;
    s += m.weights()[i] * sq;
  }
  return s;
}

/// Exact optimal coupling for the Euclidean ground cost, solved as a
/// transportation LP. Ties between optimal plans are resolved by the
/// simplex pivoting rule, so the plan is deterministic.
inline Coupling optimal_coupling(const DiscreteMeasure& m, const DiscreteMeasure& mp) {
  if (m.dimension() != mp.dimension())
    throw ConfigError("optimal_coupling: measures live in different dimensions");
  const std::size_t n = m.size();
  const std::size_t k = mp.size();
  detail::DenseMatrix a(n + k, n * k);
  std::vector<double> b(n + k);
  std::vector<double> c(n * k);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      const std::size_t var = i * k + j;
      a(i, var) = 1.0;
      a(n + j, var) = 1.0;
      c[var] = euclidean_distance(m.support()[i], mp.support()[j]);
    }
    b[i] = m.weights()[i];
  }
  for (std::size_t j = 0; j < k; ++j) b[n + j] = mp.weights()[j];

  detail::LpSolution sol;
  try {
    sol = detail::DenseSimplex::minimize(a, b, c);
  } catch (const LpError& e) {
    throw LpError(std::string("internal error in transport LP: ") + e.what());
  }
  Coupling out{m, mp, std::vector<std::vector<double>>(n, std::vector<double>(k, 0.0))};
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < k; ++j) out.plan[i][j] = sol.x[i * k + j];
  return out;
}

inline double wasserstein1(const DiscreteMeasure& m, const DiscreteMeasure& mp) {
  return optimal_coupling(m, mp).cost();
}

}  // namespace asymgame
