#pragma once

// Backward convexification on the belief simplex.
//
// With W(t_n, .) = 0 the value layers are computed as
//
//   W(t_k, .) = Vex[ W(t_{k+1}, .) + tau H(t_k, .) ]
//
// where Vex is the lower convex envelope over the simplex grid. Each envelope
// point keeps the convex combination of grid nodes realizing it; those
// combinations are the splittings of the optimal belief martingale.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "asymgame/detail/dense_lp.hpp"
#include "asymgame/detail/parallel.hpp"
#include "asymgame/errors.hpp"
#include "asymgame/game.hpp"
#include "asymgame/measures.hpp"
#include "asymgame/payoff_expr.hpp"

namespace asymgame {

inline constexpr std::size_t kDefaultGridCap = 2'000'000;

/// All beliefs with components k/r. Nodes are ordered lexicographically
/// from (1, 0, ..., 0) down to (0, ..., 0, 1).
class SimplexGrid {
 public:
  SimplexGrid() = default;

  static double node_count(std::size_t dim, std::size_t res) {
    // C(r + I - 1, I - 1) in floating point so the cap check cannot overflow.
    double c = 1.0;
    for (std::size_t j = 1; j < dim; ++j)
      c = c * static_cast<double>(res + j) / static_cast<double>(j);
    return std::round(c);
  }

  static SimplexGrid build(std::size_t dim, std::size_t res, std::size_t cap = kDefaultGridCap) {
    if (dim < 1) throw ConfigError("grid: dimension must be at least 1");
    if (res < 1) throw ConfigError("grid: resolution must be at least 1");
    const double count = node_count(dim, res);
    if (count > static_cast<double>(cap))
      throw LimitError("grid: " + std::to_string(static_cast<long long>(count)) +
                       " nodes exceed the cap of " + std::to_string(cap) +
                       "; lower grid_resolution or raise the cap");
    SimplexGrid g;
    g.dim_ = dim;
    g.res_ = res;
    g.counts_.reserve(static_cast<std::size_t>(count));
    std::vector<int> cur(dim, 0);
    g.enumerate(cur, 0, static_cast<int>(res));
    for (std::size_t i = 0; i < g.counts_.size(); ++i) g.lookup_.emplace(g.counts_[i], i);
    return g;
  }

  std::size_t dimension() const noexcept { return dim_; }
  std::size_t resolution() const noexcept { return res_; }
  std::size_t size() const noexcept { return counts_.size(); }

  /// Integer numerators k_i of node i (components k_i / r).
  const std::vector<int>& counts(std::size_t node) const { return counts_[node]; }

  Belief belief(std::size_t node) const {
    std::vector<double> w(dim_);
    for (std::size_t d = 0; d < dim_; ++d)
      w[d] = static_cast<double>(counts_[node][d]) / static_cast<double>(res_);
    return Belief(std::move(w));
  }

  /// Index of the node equal to p (within 1e-9 per component), if any.
  std::optional<std::size_t> find(const Belief& p) const {
    if (p.size() != dim_) return std::nullopt;
    std::vector<int> k(dim_);
    for (std::size_t d = 0; d < dim_; ++d) {
      const double scaled = p[d] * static_cast<double>(res_);
      const double rounded = std::round(scaled);
      if (std::abs(scaled - rounded) > 1e-9 * static_cast<double>(res_)) return std::nullopt;
      k[d] = static_cast<int>(rounded);
    }
    auto it = lookup_.find(k);
    if (it == lookup_.end()) return std::nullopt;
    return it->second;
  }

  std::optional<std::size_t> find_counts(const std::vector<int>& k) const {
    auto it = lookup_.find(k);
    if (it == lookup_.end()) return std::nullopt;
    return it->second;
  }

  /// Node index of the vertex e_i.
  std::size_t vertex(std::size_t i) const {
    std::vector<int> k(dim_, 0);
    k[i] = static_cast<int>(res_);
    return lookup_.at(k);
  }

 private:
  void enumerate(std::vector<int>& cur, std::size_t d, int remaining) {
    if (d + 1 == dim_) {
      cur[d] = remaining;
      counts_.push_back(cur);
      return;
    }
    for (int k = remaining; k >= 0; --k) {
      cur[d] = k;
      enumerate(cur, d + 1, remaining - k);
    }
  }

  std::size_t dim_ = 0;
  std::size_t res_ = 0;
  std::vector<std::vector<int>> counts_;
  std::map<std::vector<int>, std::size_t> lookup_;
};

inline SimplexGrid build_grid(std::size_t dim, std::size_t res, std::size_t cap = kDefaultGridCap) {
  return SimplexGrid::build(dim, res, cap);
}

struct SupportPoint {
  std::size_t node = 0;
  double weight = 0.0;
};

using Support = std::vector<SupportPoint>;

struct Envelope {
  std::vector<double> values;
  std::vector<Support> supports;
};

namespace detail {

// A node keeps itself as sole support when its own value is on the envelope
// up to this relative slack.
inline constexpr double kSelfSupportTol = 1e-12;

inline void finalize_node(std::size_t node, double f, double env, Support sup, Envelope& out) {
  if (f <= env + kSelfSupportTol * (1.0 + std::abs(f))) {
    out.values[node] = f;
    out.supports[node] = {{node, 1.0}};
  } else {
    out.values[node] = env;
    out.supports[node] = std::move(sup);
  }
}

// Two types: lower hull of the points (k_2, f) by monotone chain.
inline Envelope envelope_two_types(const SimplexGrid& grid, const std::vector<double>& f) {
  const std::size_t n = grid.size();
  // Node i has k_2 = i, i.e. abscissa i.
  std::vector<std::size_t> hull;
  for (std::size_t i = 0; i < n; ++i) {
    while (hull.size() >= 2) {
      const std::size_t a = hull[hull.size() - 2];
      const std::size_t b = hull.back();
      const double cross = (static_cast<double>(b) - static_cast<double>(a)) * (f[i] - f[a]) -
                           (f[b] - f[a]) * (static_cast<double>(i) - static_cast<double>(a));
      if (cross <= 0.0) {
        hull.pop_back();
      } else {
        break;
      }
    }
    hull.push_back(i);
  }
  Envelope out{std::vector<double>(n), std::vector<Support>(n)};
  std::size_t seg = 0;
  for (std::size_t i = 0; i < n; ++i) {
    while (seg + 1 < hull.size() && hull[seg + 1] < i) ++seg;
    const std::size_t a = hull[seg];
    if (a == i || seg + 1 == hull.size()) {
      finalize_node(i, f[i], f[i], {{i, 1.0}}, out);
      continue;
    }
    const std::size_t b = hull[seg + 1];
    if (b == i) {
      finalize_node(i, f[i], f[i], {{i, 1.0}}, out);
      continue;
    }
    const double span = static_cast<double>(b - a);
    const double wb = static_cast<double>(i - a) / span;
    const double wa = static_cast<double>(b - i) / span;
    const double env = wa * f[a] + wb * f[b];
    finalize_node(i, f[i], std::min(env, f[i]), {{a, wa}, {b, wb}}, out);
  }
  return out;
}

// General dimension: one LP per node over the convex weights of all nodes,
//   min sum_j lambda_j f_j  s.t.  sum_j lambda_j k_j = k_node (first I-1 coords),
//                                 sum_j lambda_j = 1, lambda >= 0.
inline void envelope_lp_node(const SimplexGrid& grid, const std::vector<double>& f,
                             std::size_t node, Envelope& out) {
  const std::size_t n = grid.size();
  const std::size_t dim = grid.dimension();
  DenseMatrix a(dim, n);
  std::vector<double> b(dim);
  for (std::size_t j = 0; j < n; ++j) {
    const auto& k = grid.counts(j);
    for (std::size_t d = 0; d + 1 < dim; ++d) a(d, j) = static_cast<double>(k[d]);
    a(dim - 1, j) = 1.0;
  }
  const auto& kn = grid.counts(node);
  for (std::size_t d = 0; d + 1 < dim; ++d) b[d] = static_cast<double>(kn[d]);
  b[dim - 1] = 1.0;
  const auto sol = DenseSimplex::minimize(a, b, f);
  Support sup;
  for (std::size_t j = 0; j < n; ++j)
    if (sol.x[j] > 0.0) sup.push_back({j, sol.x[j]});
  double total = 0.0;
  for (const auto& s : sup) total += s.weight;
  double env = 0.0;
  for (auto& s : sup) {
    s.weight /= total;
    env += s.weight * f[s.node];
  }
  finalize_node(node, f[node], std::min(env, f[node]), std::move(sup), out);
}

}  // namespace detail

/// Lower convex envelope of grid values f, with the realizing convex
/// combination at each node. Exact lower hull for two types, per-node LP
/// otherwise.
inline Envelope convex_envelope(const SimplexGrid& grid, const std::vector<double>& f,
                                unsigned threads = 1) {
  if (f.size() != grid.size()) throw ConfigError("envelope: value count does not match grid");
  for (double v : f)
    if (!std::isfinite(v)) throw ConfigError("envelope: non-finite input value");
  const std::size_t n = grid.size();
  if (grid.dimension() == 1) return {f, {Support{{0, 1.0}}}};
  if (grid.dimension() == 2) return detail::envelope_two_types(grid, f);
  Envelope out{std::vector<double>(n), std::vector<Support>(n)};
  detail::parallel_for(n, threads, [&](std::size_t node) { detail::envelope_lp_node(grid, f, node, out); });
  return out;
}

/// Solved value layers W[k][node] for k = 0..n, plus the Hamiltonian and the
/// envelope supports of each non-terminal layer.
struct ValueField {
  GameSpec spec;
  SimplexGrid grid;
  std::vector<std::vector<double>> values;       // [k][node], k = 0..n
  std::vector<std::vector<double>> hamiltonian;  // [k][node], k < n
  std::vector<std::vector<Support>> supports;    // [k][node], k < n

  std::size_t layers() const noexcept { return values.size(); }
  std::size_t time_steps() const noexcept { return spec.time_steps; }
  double tau() const { return spec.tau(); }
  double time(std::size_t k) const { return spec.time(k); }

  /// Envelope support is the node itself: discrete analogue of an extreme
  /// point of the graph. Undefined on the terminal layer (reported false).
  bool exposed(std::size_t k, std::size_t node) const {
    if (k >= supports.size()) return false;
    const auto& s = supports[k][node];
    return s.size() == 1 && s.front().node == node;
  }
};

struct SolveOptions {
  unsigned threads = 1;
  std::size_t grid_cap = kDefaultGridCap;
};

namespace detail {

inline std::string location(const GameSpec& spec, std::size_t k, const SimplexGrid& grid,
                            std::size_t node) {
  std::string s = "(t=" + format_double(spec.time(k)) + ", k=" + std::to_string(k) +
                  ", node=" + std::to_string(node) + " p=[";
  const auto& c = grid.counts(node);
  for (std::size_t d = 0; d < c.size(); ++d)
    s += (d ? "," : "") + std::to_string(c[d]) + "/" + std::to_string(grid.resolution());
  return s + "])";
}

template <typename Fn>
void with_location(const GameSpec& spec, std::size_t k, const SimplexGrid& grid, std::size_t node,
                   Fn&& fn) {
  try {
    fn();
  } catch (const EvalError& e) {
    throw EvalError(std::string(e.what()) + " at " + location(spec, k, grid, node));
  } catch (const LpError& e) {
    throw LpError(std::string(e.what()) + " at " + location(spec, k, grid, node));
  }
}

/// H(t_k, .) on every grid node.
inline std::vector<double> hamiltonian_layer(const GameSpec& spec, const SimplexGrid& grid,
                                             std::size_t k, unsigned threads) {
  std::vector<PayoffMatrix> tensor;
  with_location(spec, k, grid, 0, [&] { tensor = payoff_tensor(spec, spec.time(k)); });
  std::vector<double> h(grid.size());
  parallel_for(grid.size(), threads, [&](std::size_t node) {
    with_location(spec, k, grid, node, [&] {
      h[node] = solve_matrix_game(payoff_matrix(tensor, grid.belief(node))).value;
    });
  });
  return h;
}

}  // namespace detail

inline ValueField solve_backward(const GameSpec& spec, const SolveOptions& opts = {}) {
  spec.validate();
  ValueField vf;
  vf.spec = spec;
  vf.grid = build_grid(spec.num_types(), spec.grid_resolution, opts.grid_cap);
  const std::size_t n = spec.time_steps;
  const std::size_t nodes = vf.grid.size();
  const double tau = spec.tau();
  vf.values.assign(n + 1, std::vector<double>(nodes, 0.0));
  vf.hamiltonian.assign(n, {});
  vf.supports.assign(n, {});
  for (std::size_t step = n; step-- > 0;) {
    vf.hamiltonian[step] = detail::hamiltonian_layer(spec, vf.grid, step, opts.threads);
    std::vector<double> g(nodes);
    for (std::size_t j = 0; j < nodes; ++j) g[j] = vf.values[step + 1][j] + tau * vf.hamiltonian[step][j];
    auto env = convex_envelope(vf.grid, g, opts.threads);
    vf.values[step] = std::move(env.values);
    vf.supports[step] = std::move(env.supports);
  }
  return vf;
}

// ---------------------------------------------------------------------------
// Verifiers

struct ResidualReport {
  double max_violation = 0.0;
  std::size_t k = 0;
  std::size_t node = 0;
  std::size_t checked = 0;
  double tolerance = 0.0;
  bool passed() const { return max_violation <= tolerance; }
};

struct SupersolutionReport {
  ResidualReport exposed;
  double vertex_equality_residual = 0.0;
  double vertex_tolerance = 1e-9;
  bool passed() const { return exposed.passed() && vertex_equality_residual <= vertex_tolerance; }
};

/// (W[k+1] - W[k]) / tau + H(t_k, p), with H recomputed from the game.
inline std::vector<std::vector<double>> time_residuals(const ValueField& vf, unsigned threads = 1) {
  std::vector<std::vector<double>> res(vf.time_steps());
  for (std::size_t k = 0; k < vf.time_steps(); ++k) {
    const auto h = detail::hamiltonian_layer(vf.spec, vf.grid, k, threads);
    res[k].resize(vf.grid.size());
    for (std::size_t j = 0; j < vf.grid.size(); ++j)
      res[k][j] = (vf.values[k + 1][j] - vf.values[k][j]) / vf.tau() + h[j];
  }
  return res;
}

/// Residual >= -tol at every node and every k < n.
inline ResidualReport verify_subsolution(const ValueField& vf, double tol = 1e-8,
                                         unsigned threads = 1) {
  ResidualReport rep;
  rep.tolerance = tol;
  const auto res = time_residuals(vf, threads);
  for (std::size_t k = 0; k < res.size(); ++k)
    for (std::size_t j = 0; j < res[k].size(); ++j) {
      ++rep.checked;
      const double v = -res[k][j];
      if (v > rep.max_violation) rep = {v, k, j, rep.checked, tol};
    }
  return rep;
}

/// Residual <= tol at exposed nodes; equality of the scheme at the simplex vertices.
inline SupersolutionReport verify_dual_supersolution(const ValueField& vf, double tol = 1e-8,
                                                     double vertex_tol = 1e-9,
                                                     unsigned threads = 1) {
  SupersolutionReport rep;
  rep.exposed.tolerance = tol;
  rep.vertex_tolerance = vertex_tol;
  const auto res = time_residuals(vf, threads);
  for (std::size_t k = 0; k < res.size(); ++k) {
    for (std::size_t j = 0; j < res[k].size(); ++j) {
      if (!vf.exposed(k, j)) continue;
      ++rep.exposed.checked;
      const double v = res[k][j];
      if (v > rep.exposed.max_violation) {
        rep.exposed.max_violation = v;
        rep.exposed.k = k;
        rep.exposed.node = j;
      }
    }
    for (std::size_t i = 0; i < vf.grid.dimension(); ++i) {
      const std::size_t v = vf.grid.vertex(i);
      rep.vertex_equality_residual =
          std::max(rep.vertex_equality_residual, std::abs(res[k][v]) * vf.tau());
    }
  }
  return rep;
}

struct RegularityReport {
  // Constants: sampled estimates, raised to the exact maxima over the
  // type points and time layers the scheme actually uses.
  LipschitzEstimate sampled;
  double sup_bound = 0.0;
  double lip_x = 0.0;

  double convexity_residual = 0.0;
  double convexity_tolerance = 1e-9;

  double max_time_increment = 0.0;
  double time_increment_bound = 0.0;

  double belief_lipschitz_excess = 0.0;  // max of |dW| - bound over sampled pairs; <= 0 passes
  std::size_t belief_pairs = 0;

  bool convex_ok() const { return convexity_residual <= convexity_tolerance; }
  bool time_ok() const { return max_time_increment <= time_increment_bound; }
  bool belief_ok() const { return belief_lipschitz_excess <= 0.0; }
  bool passed() const { return convex_ok() && time_ok() && belief_ok(); }
};

/// Payoff constants over the spec's domain: sampled estimate plus exact
/// maxima on the discrete type/time set.
inline RegularityReport payoff_constants(const GameSpec& spec) {
  RegularityReport rep;
  SampleDomain dom;
  const std::size_t nx = spec.type_points.front().size();
  dom.x_box.assign(nx, {0.0, 0.0});
  for (std::size_t d = 0; d < nx; ++d) {
    double lo = spec.type_points.front()[d];
    double hi = lo;
    for (const auto& x : spec.type_points) {
      lo = std::min(lo, x[d]);
      hi = std::max(hi, x[d]);
    }
    dom.x_box[d] = {lo, hi};
  }
  dom.t_lo = 0.0;
  dom.t_hi = spec.horizon;
  dom.controls_u = spec.controls_u;
  dom.controls_v = spec.controls_v;
  rep.sampled = lipschitz_bound(spec.payoff, dom);
  rep.sup_bound = rep.sampled.sup_bound;
  rep.lip_x = rep.sampled.lip_x;
  for (std::size_t k = 0; k <= spec.time_steps; ++k) {
    const auto tensor = payoff_tensor(spec, spec.time(k));
    for (std::size_t i = 0; i < tensor.size(); ++i)
      for (std::size_t r = 0; r < tensor[i].rows(); ++r)
        for (std::size_t c = 0; c < tensor[i].cols(); ++c) {
          rep.sup_bound = std::max(rep.sup_bound, std::abs(tensor[i](r, c)));
          for (std::size_t j = 0; j < i; ++j) {
            const double dist = euclidean_distance(spec.type_points[i], spec.type_points[j]);
            if (dist > 0.0)
              rep.lip_x = std::max(rep.lip_x, std::abs(tensor[i](r, c) - tensor[j](r, c)) / dist);
          }
        }
  }
  return rep;
}

/// Convexity of each layer, time increments against sup|l| tau, and belief
/// Lipschitz continuity against lip_x (T - t_k) d_1 plus grid slack 2 sup|l| T / r.
inline RegularityReport regularity_report(const ValueField& vf, unsigned threads = 1,
                                          std::size_t max_pairs = 2000) {
  auto rep = payoff_constants(vf.spec);
  const auto& grid = vf.grid;
  for (std::size_t k = 0; k < vf.layers(); ++k) {
    const auto env = convex_envelope(grid, vf.values[k], threads);
    for (std::size_t j = 0; j < grid.size(); ++j)
      rep.convexity_residual = std::max(rep.convexity_residual, std::abs(env.values[j] - vf.values[k][j]));
  }

  rep.time_increment_bound = rep.sup_bound * vf.tau() + 1e-9;
  for (std::size_t k = 0; k + 1 < vf.layers(); ++k)
    for (std::size_t j = 0; j < grid.size(); ++j)
      rep.max_time_increment =
          std::max(rep.max_time_increment, std::abs(vf.values[k + 1][j] - vf.values[k][j]));

  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  const std::size_t n = grid.size();
  if (n * (n - 1) / 2 <= max_pairs) {
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = a + 1; b < n; ++b) pairs.emplace_back(a, b);
  } else {
    std::mt19937_64 gen(0x5eed);
    for (std::size_t s = 0; s < max_pairs; ++s) pairs.emplace_back(gen() % n, gen() % n);
  }
  const double slack =
      2.0 * rep.sup_bound * vf.spec.horizon / static_cast<double>(grid.resolution());
  std::vector<double> dist(pairs.size());
  detail::parallel_for(pairs.size(), threads, [&](std::size_t s) {
    const auto [a, b] = pairs[s];
    dist[s] = wasserstein1(grid.belief(a).induced_measure(vf.spec.type_points),
                           grid.belief(b).induced_measure(vf.spec.type_points));
  });
  rep.belief_pairs = pairs.size();
  rep.belief_lipschitz_excess = pairs.empty() ? 0.0 : -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < vf.layers(); ++k) {
    const double remaining = vf.spec.horizon - vf.time(k);
    for (std::size_t s = 0; s < pairs.size(); ++s) {
      const auto [a, b] = pairs[s];
      const double diff = std::abs(vf.values[k][a] - vf.values[k][b]);
      const double bound = rep.lip_x * remaining * dist[s] + slack;
      rep.belief_lipschitz_excess = std::max(rep.belief_lipschitz_excess, diff - bound);
    }
  }
  return rep;
}

}  // namespace asymgame
