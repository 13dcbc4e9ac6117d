// Acceptance suite: one PASS/FAIL line per criterion. Exit status is
// nonzero when any criterion fails.

#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "asymgame/cli.hpp"
#include "test_support.hpp"

using namespace asymgame;
using asymgame::testing::constant_game;
using asymgame::testing::make_spec;
using asymgame::testing::random_game;
using asymgame::testing::revealing_game;

namespace {

constexpr double kEnvelopeTol = 1e-9;
constexpr double kResidualTol = 1e-8;
constexpr double kAttainTol = 1e-7;
constexpr double kOracleTol = 1e-6;
constexpr double kClosedFormTol = 1e-8;
constexpr std::uint64_t kSeed = 424242;
constexpr std::size_t kSamples = 100000;

struct Outcome {
  bool passed = true;
  std::string detail;
};

void worst(double& acc, double v) { acc = std::max(acc, v); }

std::string fmt(double v) { return io::format_real(v); }

GameSpec time_dependent_game(std::size_t steps = 6, std::size_t grid = 10) {
  return make_spec({{0.0}, {1.0}}, {0.5, 0.5}, {{0.0}, {0.5}, {1.0}}, {{0.0}, {1.0}},
                   "t * u1 * v1 + (1 - t) * abs(x1 - u1)", 1.0, steps, grid);
}

GameSpec three_type_game() {
  return make_spec({{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}}, {0.5, 0.25, 0.25},
                   {{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}}, {{-1.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}},
                   "abs(x1 - u1) + abs(x2 - u2) + 0.5 * (u1 * v1 + u2 * v2) + 0.25 * t * v1", 2.0, 5, 4);
}

Outcome terminal_condition() {
  std::mt19937_64 gen(1);
  std::vector<GameSpec> games{revealing_game(), time_dependent_game(), three_type_game()};
  for (int i = 0; i < 5; ++i) games.push_back(random_game(gen, 5, 10));
  double w = 0.0;
  for (const auto& g : games) {
    const auto vf = solve_backward(g);
    for (double v : vf.values.back()) worst(w, std::abs(v));
  }
  return {w == 0.0, "max |W(T,p)| = " + fmt(w) + " over " + std::to_string(games.size()) + " games"};
}

Outcome convexity() {
  std::mt19937_64 gen(2);
  double res = 0.0;
  std::vector<GameSpec> games{random_game(gen, 10, 20), random_game(gen, 10, 20), time_dependent_game(10, 20),
                              three_type_game()};
  for (const auto& g : games) {
    const auto vf = solve_backward(g);
    for (std::size_t k = 0; k < vf.layers(); ++k) {
      const auto env = convex_envelope(vf.grid, vf.values[k]);
      for (std::size_t j = 0; j < vf.grid.size(); ++j) worst(res, vf.values[k][j] - env.values[j]);
    }
  }
  return {res <= kEnvelopeTol, "max W - Vex W = " + fmt(res)};
}

Outcome brute_force_agreement() {
  std::mt19937_64 gen(3);
  std::vector<GameSpec> games{time_dependent_game(6, 10), revealing_game(6, 10)};
  for (int i = 0; i < 4; ++i) games.push_back(random_game(gen, 6, 10));
  games.push_back(random_game(gen, 5, 8, 2, false));
  double err = 0.0;
  for (const auto& g : games) {
    const auto vf = solve_backward(g);
    for (std::size_t j = 0; j < vf.grid.size(); ++j)
      worst(err, std::abs(brute_force_value(g, vf.grid.belief(j), 2) - vf.values[0][j]));
  }
  return {err <= kOracleTol, "max |brute force - scheme| = " + fmt(err) + " over " +
                                 std::to_string(games.size()) + " instances"};
}

Outcome attainment() {
  std::mt19937_64 gen(4);
  std::vector<GameSpec> games{time_dependent_game(), three_type_game(), random_game(gen, 8, 12),
                              random_game(gen, 5, 5, 3)};
  double err = 0.0;
  bool martingale_ok = true;
  for (const auto& g : games) {
    const auto vf = solve_backward(g);
    for (std::size_t j = 0; j < vf.grid.size(); ++j) {
      const auto m = extract_optimal_martingale(vf, vf.grid.belief(j));
      worst(err, std::abs(martingale_cost(g, m) - vf.values[0][j]));
      martingale_ok = martingale_ok && check_martingale(m, &vf.grid).passed();
    }
  }
  return {err <= kAttainTol && martingale_ok,
          "max |cost - W(0,p0)| = " + fmt(err) + (martingale_ok ? "" : ", martingale property violated")};
}

Outcome dynamic_programming() {
  std::mt19937_64 gen(5);
  double res = 0.0;
  for (const auto& g : {time_dependent_game(), three_type_game(), random_game(gen, 8, 16), random_game(gen, 5, 6, 3)})
    worst(res, dpp_residual(solve_backward(g)));
  return {res <= kEnvelopeTol, "max DPP residual = " + fmt(res)};
}

Outcome viscosity() {
  std::mt19937_64 gen(6);
  double sub = 0.0, sup = 0.0, vertex = 0.0;
  for (const auto& g : {time_dependent_game(), three_type_game(), random_game(gen, 8, 12), random_game(gen, 8, 12),
                        random_game(gen, 5, 5, 3)}) {
    const auto vf = solve_backward(g);
    worst(sub, verify_subsolution(vf, kResidualTol).max_violation);
    const auto s = verify_dual_supersolution(vf, kResidualTol, kEnvelopeTol);
    worst(sup, s.exposed.max_violation);
    worst(vertex, s.vertex_equality_residual);
  }
  return {sub <= kResidualTol && sup <= kResidualTol && vertex <= kEnvelopeTol,
          "subsolution " + fmt(sub) + ", supersolution at exposed nodes " + fmt(sup) + ", vertex equality " +
              fmt(vertex)};
}

Outcome isaacs() {
  std::mt19937_64 gen(7);
  std::uniform_int_distribution<std::size_t> size(1, 6);
  std::uniform_real_distribution<double> entry(-5.0, 5.0);
  double gap = 0.0;
  bool pure_nonneg = true;
  for (int trial = 0; trial < 100; ++trial) {
    PayoffMatrix a(size(gen), size(gen));
    for (std::size_t r = 0; r < a.rows(); ++r)
      for (std::size_t c = 0; c < a.cols(); ++c) a(r, c) = entry(gen);
    worst(gap, isaacs_gap(a, StrategyClass::mixed));
    pure_nonneg = pure_nonneg && isaacs_gap(a, StrategyClass::pure) >= 0.0;
  }
  return {gap <= kEnvelopeTol && pure_nonneg, "max mixed gap = " + fmt(gap) + " over 100 matrices"};
}

Outcome regularity() {
  std::mt19937_64 gen(8);
  double time_excess = -1e300, belief_excess = -1e300;
  for (const auto& g : {time_dependent_game(), three_type_game(), random_game(gen, 8, 12), random_game(gen, 8, 12)}) {
    const auto rep = regularity_report(solve_backward(g));
    worst(time_excess, rep.max_time_increment - rep.time_increment_bound);
    worst(belief_excess, rep.belief_lipschitz_excess);
  }
  return {time_excess <= 0.0 && belief_excess <= 0.0,
          "time increment excess " + fmt(time_excess) + ", belief Lipschitz excess " + fmt(belief_excess)};
}

Outcome closed_forms() {
  std::string detail;
  bool ok = true;
  // Revealing game: zero value and an immediate half/half vertex split.
  const auto rev = solve_backward(revealing_game(4, 10));
  double w = 0.0;
  for (const auto& layer : rev.values)
    for (double v : layer) worst(w, std::abs(v));
  const auto m = extract_optimal_martingale(rev, Belief({0.5, 0.5}));
  bool split = m.root().children.size() == 2;
  for (const auto& e : m.root().children) {
    const auto& b = m.nodes[e.child].belief;
    split = split && std::abs(e.prob - 0.5) <= 1e-12 && (b[0] == 1.0 || b[1] == 1.0);
  }
  ok = ok && w <= kEnvelopeTol && split;
  detail += "revealing max|W| " + fmt(w) + (split ? " with vertex split" : " without vertex split");
  // Constant payoff: W = c (T - t), exactly.
  bool exact = true;
  const auto cst = solve_backward(constant_game(2.0, 2, 4, 8));
  for (std::size_t k = 0; k < cst.layers(); ++k)
    for (double v : cst.values[k]) exact = exact && v == 2.0 * (1.0 - cst.time(k));
  ok = ok && exact;
  detail += exact ? ", constant exact" : ", constant inexact";
  // Time-independent Hamiltonian: W(t_k) = (T - t_k) Vex H.
  std::mt19937_64 gen(9);
  double err = 0.0;
  for (int trial = 0; trial < 4; ++trial) {
    const auto vf = solve_backward(random_game(gen, 6, 12, 2, false));
    const auto env = convex_envelope(vf.grid, vf.hamiltonian[0]);
    for (std::size_t k = 0; k < vf.layers(); ++k)
      for (std::size_t j = 0; j < vf.grid.size(); ++j)
        worst(err, std::abs(vf.values[k][j] - (vf.spec.horizon - vf.time(k)) * env.values[j]));
  }
  ok = ok && err <= kClosedFormTol;
  detail += ", time-independent error " + fmt(err);
  return {ok, detail};
}

Outcome monte_carlo() {
  std::mt19937_64 gen(10);
  std::vector<GameSpec> games{time_dependent_game(), revealing_game(4, 10), three_type_game()};
  auto extra = random_game(gen, 6, 10);
  extra.prior = Belief({0.5, 0.5});
  games.push_back(extra);
  bool ok = true;
  std::string detail;
  for (const auto& g : games) {
    const auto vf = solve_backward(g);
    const auto node = vf.grid.find(g.prior);
    if (!node) return {false, "prior not on grid"};
    const auto s = synthesize_strategy(vf, extract_optimal_martingale(vf, g.prior));
    const auto r = simulate_play(g, s, {}, kSeed, kSamples);
    const double band = std::max(3.0 * r.std_error, 5.0 * payoff_constants(g).sup_bound * g.tau());
    const double dev = std::abs(r.mean - vf.values[0][*node]);
    ok = ok && dev <= band;
    detail += (detail.empty() ? "" : "; ") + fmt(dev) + " <= " + fmt(band);
  }
  return {ok, "|mean - W| vs band: " + detail};
}

Outcome comparison() {
  std::mt19937_64 gen(11);
  double shift_err = 0.0, order_violation = 0.0;
  for (int trial = 0; trial < 4; ++trial) {
    const auto spec = trial == 3 ? three_type_game() : random_game(gen, 6, 12);
    auto shifted = spec;
    shifted.payoff = spec.payoff.shifted(0.25);
    auto bigger = spec;
    bigger.payoff = PayoffExpr::parse("(" + spec.payoff.print() + ") + abs(u1 - v1) * x1 * x1");
    const auto a = solve_backward(spec), b = solve_backward(shifted), c = solve_backward(bigger);
    for (std::size_t k = 0; k < a.layers(); ++k)
      for (std::size_t j = 0; j < a.grid.size(); ++j) {
        worst(shift_err, std::abs(b.values[k][j] - a.values[k][j] - 0.25 * (spec.horizon - a.time(k))));
        worst(order_violation, a.values[k][j] - c.values[k][j]);
      }
  }
  return {shift_err <= kEnvelopeTol && order_violation <= kResidualTol,
          "shift error " + fmt(shift_err) + ", ordering violation " + fmt(order_violation)};
}

Outcome reproducibility() {
  namespace fs = std::filesystem;
  const auto root = fs::temp_directory_path() / "asymgame_acceptance_repro";
  fs::remove_all(root);
  std::ostringstream sink;
  std::vector<std::string> dirs;
  const std::vector<std::pair<std::string, unsigned>> runs{{"time_dependent.yaml", 1}, {"time_dependent.yaml", 1},
                                                           {"time_dependent.yaml", 4}, {"three_types.yaml", 1},
                                                           {"three_types.yaml", 3}};
  auto* old = std::cout.rdbuf(sink.rdbuf());
  int status = 0;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    cli::RunConfig cfg;
    cfg.spec_path = std::string(ASYMGAME_DATA_DIR) + "/" + runs[i].first;
    cfg.command = "check";
    cfg.threads = runs[i].second;
    cfg.out_dir = (root / std::to_string(i)).string();
    status |= cli::run(cfg, sink);
    dirs.push_back(cfg.out_dir);
  }
  std::cout.rdbuf(old);
  if (status != 0) return {false, "check command failed: " + sink.str()};
  bool same = true;
  for (std::size_t i = 1; i < runs.size(); ++i) {
    if (runs[i].first != runs[i - 1].first) continue;
    for (const char* f : {"value.csv", "martingale.json", "check.json"})
      same = same && io::read_file(dirs[i] + "/" + f) == io::read_file(dirs[i - 1] + "/" + f);
  }
  fs::remove_all(root);
  return {same, same ? "repeated runs byte-identical across 1/3/4 threads" : "outputs differ between runs"};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"C1 terminal condition", terminal_condition},
      {"C2 convexity in belief", convexity},
      {"C3 brute-force agreement", brute_force_agreement},
      {"C4 martingale attainment", attainment},
      {"C5 dynamic programming identity", dynamic_programming},
      {"C6 viscosity residuals", viscosity},
      {"C7 mixed Isaacs condition", isaacs},
      {"C8 regularity bounds", regularity},
      {"C9 closed-form instances", closed_forms},
      {"C10 Monte Carlo value", monte_carlo},
      {"C11 comparison and shift", comparison},
      {"C12 reproducibility", reproducibility},
  };
  int failed = 0;
  for (const auto& [name, fn] : criteria) {
    Outcome out;
    try {
      out = fn();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    failed += out.passed ? 0 : 1;
    std::cout << (out.passed ? "PASS " : "FAIL ") << name << ": " << out.detail << std::endl;
  }
  std::cout << (criteria.size() - static_cast<std::size_t>(failed)) << "/" << criteria.size() << " criteria passed"
            << std::endl;
  return failed == 0 ? 0 : 1;
}
