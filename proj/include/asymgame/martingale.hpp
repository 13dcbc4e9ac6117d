#pragma once

// Belief martingales: discrete trees of public beliefs, their running cost,
// extraction of an optimal tree from a solved value field, a brute-force
// optimizer used as an independent oracle, the informed player's strategy
// and Monte Carlo play.
//
// Tree levels: the root (level 0) carries the prior before play starts. A
// node at level k >= 1 carries the belief held on [t_{k-1}, t_k); its edges
// lead to the beliefs held on the next interval. Leaves sit at level n.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "asymgame/detail/parallel.hpp"
#include "asymgame/errors.hpp"
#include "asymgame/game.hpp"
#include "asymgame/solver.hpp"

namespace asymgame {

struct MartingaleEdge {
  double prob = 0.0;
  std::size_t child = 0;  // index into BeliefMartingale::nodes
};

struct MartingaleNode {
  std::size_t level = 0;
  Belief belief;
  double reach_prob = 0.0;
  std::vector<MartingaleEdge> children;
};

struct BeliefMartingale {
  double horizon = 1.0;
  std::size_t time_steps = 1;
  std::vector<MartingaleNode> nodes;  // nodes[0] is the root

  double tau() const { return horizon / static_cast<double>(time_steps); }
  const MartingaleNode& root() const { return nodes.front(); }
};

inline constexpr std::size_t kMaxTreeNodes = 1'000'000;

// ---------------------------------------------------------------------------

struct MartingaleCheck {
  double martingale_residual = 0.0;  // max |sum prob * child belief - belief|, componentwise
  double prob_sum_residual = 0.0;    // max |sum prob - 1|
  double reach_residual = 0.0;       // max |child reach - parent reach * prob|
  bool leaves_on_grid = true;
  bool terminal_revelation = true;   // every leaf belief is a simplex vertex
  bool passed(double mart_tol = 1e-9, double prob_tol = 1e-12) const {
    return martingale_residual <= mart_tol && prob_sum_residual <= prob_tol &&
           reach_residual <= mart_tol;
  }
};

/// Martingale-property diagnostics. `grid` (optional) is used to check that
/// leaves are grid nodes.
inline MartingaleCheck check_martingale(const BeliefMartingale& m, const SimplexGrid* grid = nullptr) {
  MartingaleCheck out;
  for (const auto& node : m.nodes) {
    if (node.children.empty()) {
      if (grid && !grid->find(node.belief)) out.leaves_on_grid = false;
      const auto& w = node.belief.weights();
      if (std::count(w.begin(), w.end(), 1.0) != 1) out.terminal_revelation = false;
      continue;
    }
    double psum = 0.0;
    std::vector<double> mean(node.belief.size(), 0.0);
    for (const auto& e : node.children) {
      const auto& c = m.nodes.at(e.child);
      psum += e.prob;
      for (std::size_t i = 0; i < mean.size(); ++i) mean[i] += e.prob * c.belief[i];
      out.reach_residual = std::max(out.reach_residual, std::abs(c.reach_prob - node.reach_prob * e.prob));
    }
    out.prob_sum_residual = std::max(out.prob_sum_residual, std::abs(psum - 1.0));
    for (std::size_t i = 0; i < mean.size(); ++i)
      out.martingale_residual = std::max(out.martingale_residual, std::abs(mean[i] - node.belief[i]));
  }
  return out;
}

/// Riemann sum of the running cost: sum over nodes at levels 1..n of
/// tau * reach * H(t_{level-1}, belief). Levels beyond n carry no cost.
inline double martingale_cost(const GameSpec& spec, const BeliefMartingale& m) {
  const double tau = m.tau();
  std::map<std::pair<std::size_t, std::vector<double>>, double> cache;
  double cost = 0.0;
  for (const auto& node : m.nodes) {
    if (node.level == 0 || node.level > m.time_steps) continue;
    const std::size_t k = node.level - 1;
    const double t = k == m.time_steps ? m.horizon
                                       : m.horizon * static_cast<double>(k) / static_cast<double>(m.time_steps);
    auto key = std::make_pair(k, node.belief.weights());
    auto it = cache.find(key);
    if (it == cache.end()) it = cache.emplace(key, hamiltonian(spec, t, node.belief).value).first;
    cost += tau * node.reach_prob * it->second;
  }
  return cost;
}

namespace detail {

inline void append_terminal_reveal(BeliefMartingale& m) {
  const std::size_t original = m.nodes.size();
  for (std::size_t idx = 0; idx < original; ++idx) {
    if (!m.nodes[idx].children.empty()) continue;
    const Belief b = m.nodes[idx].belief;
    const auto& w = b.weights();
    if (std::count(w.begin(), w.end(), 1.0) == 1) continue;
    for (std::size_t i = 0; i < b.size(); ++i) {
      if (b[i] <= 0.0) continue;
      MartingaleNode leaf{m.nodes[idx].level + 1, Belief::vertex(i, b.size()),
                          m.nodes[idx].reach_prob * b[i], {}};
      m.nodes.push_back(std::move(leaf));
      m.nodes[idx].children.push_back({b[i], m.nodes.size() - 1});
    }
  }
}

}  // namespace detail

/// Greedy optimal martingale: from each node, split onto the recorded
/// envelope support of the corresponding layer. Its cost equals W(t_0, p0).
/// With `terminal_reveal`, leaves that are not vertices get a final costless
/// split onto the vertices.
inline BeliefMartingale extract_optimal_martingale(const ValueField& vf, const Belief& p0,
                                                   bool terminal_reveal = false) {
  const auto root_node = vf.grid.find(p0);
  if (!root_node)
    throw ConfigError("initial belief is not a node of the resolution-" +
                      std::to_string(vf.grid.resolution()) +
                      " grid; snap it to the grid or refine grid_resolution");
  BeliefMartingale m;
  m.horizon = vf.spec.horizon;
  m.time_steps = vf.time_steps();
  m.nodes.push_back({0, vf.grid.belief(*root_node), 1.0, {}});
  std::vector<std::size_t> grid_of{*root_node};
  for (std::size_t idx = 0; idx < m.nodes.size(); ++idx) {
    const std::size_t k = m.nodes[idx].level;
    if (k >= vf.time_steps()) continue;
    for (const auto& s : vf.supports[k][grid_of[idx]]) {
      if (m.nodes.size() >= kMaxTreeNodes)
        throw LimitError("martingale tree exceeds " + std::to_string(kMaxTreeNodes) + " nodes");
      m.nodes.push_back({k + 1, vf.grid.belief(s.node), m.nodes[idx].reach_prob * s.weight, {}});
      grid_of.push_back(s.node);
      m.nodes[idx].children.push_back({s.weight, m.nodes.size() - 1});
    }
  }
  if (terminal_reveal) detail::append_terminal_reveal(m);
  return m;
}

/// Max over k < n and grid p of |W[k][p] - sum_j lambda_j (tau H(t_k, p_j) + W[k+1][p_j])|
/// over the recorded supports, with H recomputed from the game.
inline double dpp_residual(const ValueField& vf, unsigned threads = 1) {
  double worst = 0.0;
  for (std::size_t k = 0; k < vf.time_steps(); ++k) {
    const auto h = detail::hamiltonian_layer(vf.spec, vf.grid, k, threads);
    for (std::size_t p = 0; p < vf.grid.size(); ++p) {
      double rhs = 0.0;
      for (const auto& s : vf.supports[k][p]) rhs += s.weight * (vf.tau() * h[s.node] + vf.values[k + 1][s.node]);
      worst = std::max(worst, std::abs(vf.values[k][p] - rhs));
    }
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Brute-force oracle

struct BruteForceLimits {
  std::size_t max_resolution = 12;
  std::size_t max_time_steps = 8;
};

/// Minimum of E[sum_k tau H(t_k, M_k)] over belief martingales on a two-type
/// grid whose per-step splits use at most `split_budget` grid nodes, by
/// dynamic programming over exhaustively enumerated splits. Independent of
/// the envelope code.
inline double brute_force_value(const GameSpec& spec, const Belief& p0, std::size_t split_budget,
                                const BruteForceLimits& limits = {}) {
  spec.validate();
  if (spec.num_types() != 2) throw LimitError("brute force: only two-type games are supported");
  if (spec.grid_resolution > limits.max_resolution)
    throw LimitError("brute force: grid_resolution " + std::to_string(spec.grid_resolution) +
                     " exceeds " + std::to_string(limits.max_resolution));
  if (spec.time_steps > limits.max_time_steps)
    throw LimitError("brute force: time_steps " + std::to_string(spec.time_steps) + " exceeds " +
                     std::to_string(limits.max_time_steps));
  if (split_budget < 1) throw ConfigError("brute force: split budget must be at least 1");

  const std::size_t r = spec.grid_resolution;
  const std::size_t nodes = r + 1;
  // Node j is the belief (1 - j/r, j/r).
  auto belief_at = [&](std::size_t j) {
    const double q = static_cast<double>(j) / static_cast<double>(r);
    return Belief({static_cast<double>(r - j) / static_cast<double>(r), q});
  };
  const double q0 = p0.size() == 2 ? p0[1] * static_cast<double>(r) : -1.0;
  if (p0.size() != 2 || std::abs(q0 - std::round(q0)) > 1e-9)
    throw ConfigError("brute force: initial belief is not a grid node");
  const auto start = static_cast<std::size_t>(std::round(q0));

  // All subsets of nodes with 1..budget members.
  std::vector<std::vector<std::size_t>> subsets;
  std::vector<std::size_t> cur;
  auto gen = [&](auto&& self, std::size_t from) -> void {
    if (!cur.empty()) subsets.push_back(cur);
    if (cur.size() == split_budget) return;
    for (std::size_t j = from; j < nodes; ++j) {
      cur.push_back(j);
      self(self, j + 1);
      cur.pop_back();
    }
  };
  gen(gen, 0);

  const double tau = spec.tau();
  std::vector<double> next(nodes, 0.0);
  for (std::size_t k = spec.time_steps; k-- > 0;) {
    std::vector<double> g(nodes);
    for (std::size_t j = 0; j < nodes; ++j)
      g[j] = tau * hamiltonian(spec, spec.time(k), belief_at(j)).value + next[j];
    std::vector<double> now(nodes, std::numeric_limits<double>::infinity());
    for (std::size_t i = 0; i < nodes; ++i) {
      for (const auto& s : subsets) {
        // Splits supported in s: the weight polytope's vertices use one
        // node equal to i or two nodes bracketing i.
        for (std::size_t x = 0; x < s.size(); ++x) {
          if (s[x] == i) now[i] = std::min(now[i], g[i]);
          for (std::size_t y = x + 1; y < s.size(); ++y) {
            const std::size_t a = s[x];
            const std::size_t b = s[y];
            if (!(a < i && i < b)) continue;
            const double wa = static_cast<double>(b - i) / static_cast<double>(b - a);
            const double wb = static_cast<double>(i - a) / static_cast<double>(b - a);
            now[i] = std::min(now[i], wa * g[a] + wb * g[b]);
          }
        }
      }
    }
    next = std::move(now);
  }
  return next[start];
}

// ---------------------------------------------------------------------------
// Strategy synthesis and play

struct StrategyNode {
  std::optional<MixedAction> u_star;  // absent at the root and beyond the horizon
  // kernels[i][c]: probability of moving to child c given type i; absent when
  // the node belief gives type i zero mass (unreachable for that type).
  std::vector<std::optional<std::vector<double>>> kernels;
};

struct InformedStrategy {
  BeliefMartingale tree;
  std::vector<StrategyNode> nodes;  // parallel to tree.nodes
};

/// Informed player's behaviour along the tree: the minimax mixed action of
/// the non-revealing game at each node, and Bayes splitting kernels
/// P(child | type i) = prob * child_belief_i / belief_i.
inline InformedStrategy synthesize_strategy(const ValueField& vf, const BeliefMartingale& m) {
  InformedStrategy s;
  s.tree = m;
  s.nodes.resize(m.nodes.size());
  const std::size_t types = vf.spec.num_types();
  for (std::size_t idx = 0; idx < m.nodes.size(); ++idx) {
    const auto& node = m.nodes[idx];
    auto& out = s.nodes[idx];
    if (node.level >= 1 && node.level <= m.time_steps)
      out.u_star = hamiltonian(vf.spec, vf.time(node.level - 1), node.belief).u_star;
    out.kernels.resize(types);
    if (node.children.empty()) continue;
    for (std::size_t i = 0; i < types; ++i) {
      if (node.belief[i] <= 0.0) continue;
      std::vector<double> k(node.children.size());
      for (std::size_t c = 0; c < node.children.size(); ++c) {
        const auto& e = node.children[c];
        k[c] = e.prob * m.nodes[e.child].belief[i] / node.belief[i];
      }
      out.kernels[i] = std::move(k);
    }
  }
  return s;
}

enum class OpponentKind { best_response, uniform, fixed };

struct Opponent {
  OpponentKind kind = OpponentKind::best_response;
  std::size_t fixed_action = 0;
};

struct SimulationResult {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t samples = 0;
};

namespace detail {

// Per-sample generator: mt19937_64 seeded from (seed, sample index), so every
// sample has its own stream regardless of how samples are distributed.
inline std::mt19937_64 sample_stream(std::uint64_t seed, std::uint64_t sample) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(sample), static_cast<std::uint32_t>(sample >> 32)};
  return std::mt19937_64(seq);
}

inline double uniform01(std::mt19937_64& gen) {
  return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

inline std::size_t sample_index(std::mt19937_64& gen, const std::vector<double>& probs) {
  double total = 0.0;
  for (double p : probs) total += p;
  const double x = uniform01(gen) * total;
  double acc = 0.0;
  std::size_t last = 0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (probs[i] <= 0.0) continue;
    last = i;
    acc += probs[i];
    if (x < acc) return i;
  }
  return last;
}

}  // namespace detail

/// Monte Carlo estimate of the informed player's expected cost against the
/// given opponent. The opponent observes only the public belief and the
/// announced mixed action.
inline SimulationResult simulate_play(const GameSpec& spec, const InformedStrategy& s,
                                      const Opponent& opponent, std::uint64_t seed,
                                      std::size_t samples, unsigned threads = 1) {
  if (samples < 2) throw ConfigError("simulation: at least two samples are required");
  const auto& tree = s.tree;
  const double tau = tree.tau();
  const std::size_t nv = spec.controls_v.size();
  if (opponent.kind == OpponentKind::fixed && opponent.fixed_action >= nv)
    throw ConfigError("simulation: fixed opponent action out of range");

  std::vector<std::size_t> reply(tree.nodes.size(), 0);
  for (std::size_t idx = 0; idx < tree.nodes.size(); ++idx) {
    const auto& sn = s.nodes[idx];
    if (!sn.u_star) continue;
    const auto& node = tree.nodes[idx];
    reply[idx] = best_response_index(
        payoff_matrix(spec, spec.time(node.level - 1), node.belief), *sn.u_star);
  }

  const auto& prior = tree.root().belief.weights();
  std::vector<double> payoff(samples);
  detail::parallel_for(samples, threads, [&](std::size_t n) {
    auto gen = detail::sample_stream(seed, n);
    const std::size_t type = detail::sample_index(gen, prior);
    const auto& x = spec.type_points[type];
    double total = 0.0;
    std::size_t idx = 0;
    while (!tree.nodes[idx].children.empty()) {
      const auto& kernel = s.nodes[idx].kernels[type];
      if (!kernel) break;
      idx = tree.nodes[idx].children[detail::sample_index(gen, *kernel)].child;
      const auto& sn = s.nodes[idx];
      if (!sn.u_star) continue;
      const std::size_t u = detail::sample_index(gen, sn.u_star->probabilities());
      std::size_t v = 0;
      switch (opponent.kind) {
        case OpponentKind::best_response:
          v = reply[idx];
          break;
        case OpponentKind::uniform:
          v = std::min<std::size_t>(nv - 1, static_cast<std::size_t>(detail::uniform01(gen) * static_cast<double>(nv)));
          break;
        case OpponentKind::fixed:
          v = opponent.fixed_action;
          break;
      }
      const double t = spec.time(tree.nodes[idx].level - 1);
      total += tau * spec.payoff.evaluate(x, t, spec.controls_u[u], spec.controls_v[v]);
    }
    payoff[n] = total;
  });

  SimulationResult res;
  res.samples = samples;
  double sum = 0.0;
  for (double p : payoff) sum += p;
  res.mean = sum / static_cast<double>(samples);
  double sq = 0.0;
  for (double p : payoff) sq += (p - res.mean) * (p - res.mean);
  res.std_error = std::sqrt(sq / static_cast<double>(samples - 1) / static_cast<double>(samples));
  return res;
}

}  // namespace asymgame
