#pragma once

// Dense two-phase tableau simplex for small linear programs in equality form:
//
//   minimize  c.x   subject to  A x = b,  x >= 0.
//
// Pivoting uses Bland's smallest-index rule for both the entering and the
// leaving variable, so the returned basic optimal solution is a deterministic
// function of the input and the method cannot cycle.

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "asymgame/errors.hpp"

namespace asymgame::detail {

/// Row-major dense matrix. Only what the solvers need.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

struct LpSolution {
  std::vector<double> x;
  double objective = 0.0;
};

class DenseSimplex {
 public:
  static constexpr double kPivotEps = 1e-12;
  static constexpr double kCostEps = 1e-11;
  static constexpr double kFeasEps = 1e-9;

  /// Solves min c.x s.t. A x = b, x >= 0. Throws LpError when infeasible or unbounded.
  static LpSolution minimize(const DenseMatrix& a, std::span<const double> b,
                             std::span<const double> c) {
    DenseSimplex s(a, b);
    s.phase_one();
    s.phase_two(c);
    return s.extract(c);
  }

 private:
  DenseSimplex(const DenseMatrix& a, std::span<const double> b)
      : m_(a.rows()), n_(a.cols()), tab_(a.rows() + 1, a.cols() + a.rows() + 1),
        basis_(a.rows()), active_(a.rows(), true) {
    if (b.size() != m_) throw LpError("lp: right-hand side size mismatch");
    rhs_col_ = n_ + m_;
    for (std::size_t r = 0; r < m_; ++r) {
      const double sign = b[r] < 0.0 ? -1.0 : 1.0;
      for (std::size_t j = 0; j < n_; ++j) tab_(r, j) = sign * a(r, j);
      tab_(r, n_ + r) = 1.0;
      tab_(r, rhs_col_) = sign * b[r];
      basis_[r] = n_ + r;
    }
  }

  // Objective row holds reduced costs; tab_(m_, rhs_col_) holds -objective.
  void load_objective(std::span<const double> cost, std::size_t ncols) {
    auto obj = tab_.row(m_);
    for (std::size_t j = 0; j <= rhs_col_; ++j) obj[j] = 0.0;
    for (std::size_t j = 0; j < ncols; ++j) obj[j] = cost[j];
    for (std::size_t r = 0; r < m_; ++r) {
      if (!active_[r]) continue;
      const double cb = basis_[r] < ncols ? cost[basis_[r]] : 0.0;
      if (cb == 0.0) continue;
      const auto row = tab_.row(r);
      for (std::size_t j = 0; j <= rhs_col_; ++j) obj[j] -= cb * row[j];
    }
  }

  void pivot(std::size_t pr, std::size_t pc) {
    auto prow = tab_.row(pr);
    const double inv = 1.0 / prow[pc];
    for (double& v : prow) v *= inv;
    prow[pc] = 1.0;
    for (std::size_t r = 0; r <= m_; ++r) {
      if (r == pr) continue;
      auto row = tab_.row(r);
      const double f = row[pc];
      if (f == 0.0) continue;
      for (std::size_t j = 0; j <= rhs_col_; ++j) row[j] -= f * prow[j];
      row[pc] = 0.0;
    }
    basis_[pr] = pc;
  }

  // Runs simplex iterations over columns [0, ncols). Returns false when unbounded.
  bool iterate(std::size_t ncols) {
    const std::size_t max_iter = 50 * (m_ + ncols) + 1000;
    for (std::size_t it = 0; it < max_iter; ++it) {
      const auto obj = tab_.row(m_);
      double scale = 1.0;
      for (std::size_t j = 0; j < ncols; ++j) scale = std::max(scale, std::abs(obj[j]));
      std::size_t enter = ncols;
      for (std::size_t j = 0; j < ncols; ++j) {
        if (obj[j] < -kCostEps * scale) {
          enter = j;
          break;
        }
      }
      if (enter == ncols) return true;

      std::size_t leave = m_;
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t r = 0; r < m_; ++r) {
        if (!active_[r]) continue;
        const double coef = tab_(r, enter);
        if (coef <= kPivotEps) continue;
        const double ratio = tab_(r, rhs_col_) / coef;
        if (ratio < best - 1e-14 ||
            (std::abs(ratio - best) <= 1e-14 && leave < m_ && basis_[r] < basis_[leave])) {
          best = ratio;
          leave = r;
        }
      }
      if (leave == m_) return false;
      pivot(leave, enter);
    }
    throw LpError("lp: iteration limit reached");
  }

  void phase_one() {
    // Artificial costs: 1 on columns [n_, n_ + m_).
    std::vector<double> cost(n_ + m_, 0.0);
    for (std::size_t r = 0; r < m_; ++r) cost[n_ + r] = 1.0;
    load_objective(cost, n_ + m_);
    if (!iterate(n_ + m_)) throw LpError("lp: phase one unbounded");

    double bnorm = 1.0;
    for (std::size_t r = 0; r < m_; ++r) bnorm = std::max(bnorm, std::abs(tab_(r, rhs_col_)));
    if (-tab_(m_, rhs_col_) > kFeasEps * bnorm) throw LpError("lp: infeasible");

    // Drive remaining artificials out of the basis; rows where that is impossible are redundant.
    for (std::size_t r = 0; r < m_; ++r) {
      if (basis_[r] < n_) continue;
      std::size_t col = n_;
      for (std::size_t j = 0; j < n_; ++j) {
        if (std::abs(tab_(r, j)) > 1e-9) {
          col = j;
          break;
        }
      }
      if (col < n_) {
        pivot(r, col);
      } else {
        active_[r] = false;
      }
    }
  }

  void phase_two(std::span<const double> c) {
    if (c.size() != n_) throw LpError("lp: cost size mismatch");
    load_objective(c, n_);
    if (!iterate(n_)) throw LpError("lp: unbounded");
  }

  LpSolution extract(std::span<const double> c) const {
    LpSolution sol;
    sol.x.assign(n_, 0.0);
    for (std::size_t r = 0; r < m_; ++r) {
      if (!active_[r] || basis_[r] >= n_) continue;
      sol.x[basis_[r]] = std::max(0.0, tab_(r, rhs_col_));
    }
    for (std::size_t j = 0; j < n_; ++j) sol.objective += c[j] * sol.x[j];
    return sol;
  }

  std::size_t m_;
  std::size_t n_;
  DenseMatrix tab_;
  std::vector<std::size_t> basis_;
  std::vector<bool> active_;
  std::size_t rhs_col_ = 0;
};

}  // namespace asymgame::detail
