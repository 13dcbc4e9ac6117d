#pragma once

// Command orchestration behind the asymgame tool. Every command reads one
// game config and writes its artifacts into the output directory.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "asymgame/errors.hpp"
#include "asymgame/game.hpp"
#include "asymgame/io.hpp"
#include "asymgame/martingale.hpp"
#include "asymgame/solver.hpp"
#include "json.hpp"

namespace asymgame::cli {

inline const std::vector<std::string>& commands() {
  static const std::vector<std::string> names{"solve",      "hamiltonian", "isaacs",
                                              "martingale", "simulate",    "check"};
  return names;
}

struct Tolerances {
  double envelope = 1e-9;  // envelope / LP identities, Isaacs gap, vertex equality
  double residual = 1e-8;  // viscosity residuals
  double identity = 1e-7;  // attainment of the extracted martingale
  double oracle = 1e-6;    // brute-force agreement
};

struct RunConfig {
  std::string spec_path;
  std::string command;
  std::string out_dir = ".";
  std::optional<std::size_t> time_steps;
  std::optional<std::size_t> grid_resolution;
  std::uint64_t seed = 424242;
  std::size_t samples = 100000;
  Tolerances tol;
  bool force_terminal_reveal = false;
  unsigned threads = 1;
  Opponent opponent;

  void validate() const {
    if (spec_path.empty()) throw ConfigError("--spec is required");
    if (out_dir.empty()) throw ConfigError("--out must not be empty");
    bool known = false;
    for (const auto& c : commands()) known |= c == command;
    if (!known) throw ConfigError("unknown command '" + command + "'");
    if (time_steps && *time_steps == 0) throw ConfigError("--time-steps must be positive");
    if (grid_resolution && *grid_resolution == 0) throw ConfigError("--grid must be positive");
    if (samples < 2) throw ConfigError("--samples must be at least 2");
    if (!(tol.envelope > 0 && tol.residual > 0 && tol.identity > 0 && tol.oracle > 0))
      throw ConfigError("tolerances must be positive");
    if (threads == 0) throw ConfigError("--threads must be positive");
  }
};

namespace detail {

inline std::string path_in(const RunConfig& cfg, const std::string& name) {
  return (std::filesystem::path(cfg.out_dir) / name).string();
}

inline void write_json(const RunConfig& cfg, const std::string& name, const nlohmann::json& j) {
  io::write_file(path_in(cfg, name), j.dump(2) + "\n");
}

struct CheckList {
  nlohmann::json items = nlohmann::json::array();
  bool all = true;

  void add(const std::string& name, double value, double tolerance, bool passed) {
    items.push_back({{"name", name}, {"value", value}, {"tolerance", tolerance}, {"passed", passed}});
    all = all && passed;
    std::cout << (passed ? "PASS " : "FAIL ") << name << ": " << io::format_real(value)
              << " (tol " << io::format_real(tolerance) << ")\n";
  }
};

inline GameSpec load(const RunConfig& cfg) {
  auto spec = io::load_spec(cfg.spec_path);
  if (cfg.time_steps) spec.time_steps = *cfg.time_steps;
  if (cfg.grid_resolution) spec.grid_resolution = *cfg.grid_resolution;
  spec.validate();
  return spec;
}

inline nlohmann::json martingale_check_json(const MartingaleCheck& c) {
  return {{"martingale_residual", c.martingale_residual},
          {"prob_sum_residual", c.prob_sum_residual},
          {"reach_residual", c.reach_residual},
          {"leaves_on_grid", c.leaves_on_grid},
          {"terminal_revelation", c.terminal_revelation}};
}

inline double reference_value(const ValueField& vf) {
  const auto node = vf.grid.find(vf.spec.prior);
  if (!node)
    throw ConfigError("prior is not a node of the resolution-" + std::to_string(vf.grid.resolution()) +
                      " grid; snap it to the grid or refine grid_resolution");
  return vf.values[0][*node];
}

inline int cmd_solve(const RunConfig& cfg, const GameSpec& spec) {
  const auto vf = solve_backward(spec, {cfg.threads});
  io::export_value_csv(vf, path_in(cfg, "value.csv"));
  nlohmann::json rep{{"types", spec.num_types()},
                     {"grid_nodes", vf.grid.size()},
                     {"time_steps", spec.time_steps},
                     {"tau", spec.tau()}};
  if (const auto node = vf.grid.find(spec.prior)) rep["value_at_prior"] = vf.values[0][*node];
  const auto consts = payoff_constants(spec);
  rep["sup_bound"] = consts.sup_bound;
  rep["lip_x"] = consts.lip_x;
  rep["lip_t"] = consts.sampled.lip_t;
  write_json(cfg, "solve_report.json", rep);
  return 0;
}

inline int cmd_hamiltonian(const RunConfig& cfg, const GameSpec& spec) {
  const auto grid = build_grid(spec.num_types(), spec.grid_resolution);
  std::string out = "k,t,node_index";
  for (std::size_t i = 0; i < grid.dimension(); ++i) out += ",p_" + std::to_string(i + 1);
  out += ",H";
  for (std::size_t a = 0; a < spec.controls_u.size(); ++a) out += ",u_" + std::to_string(a + 1);
  for (std::size_t b = 0; b < spec.controls_v.size(); ++b) out += ",v_" + std::to_string(b + 1);
  out += "\n";
  for (std::size_t k = 0; k < spec.time_steps; ++k) {
    const double t = spec.time(k);
    const auto tensor = payoff_tensor(spec, t);
    for (std::size_t j = 0; j < grid.size(); ++j) {
      const auto p = grid.belief(j);
      const auto sol = solve_matrix_game(payoff_matrix(tensor, p));
      out += std::to_string(k) + "," + io::format_real(t) + "," + std::to_string(j);
      for (std::size_t i = 0; i < p.size(); ++i) out += "," + io::format_real(p[i]);
      out += "," + io::format_real(sol.value);
      for (double x : sol.u_star.probabilities()) out += "," + io::format_real(x);
      for (double x : sol.v_star.probabilities()) out += "," + io::format_real(x);
      out += "\n";
    }
  }
  io::write_file(path_in(cfg, "hamiltonian.csv"), out);
  return 0;
}

inline int cmd_isaacs(const RunConfig& cfg, const GameSpec& spec) {
  const auto grid = build_grid(spec.num_types(), spec.grid_resolution);
  std::string out = "k,t,node_index";
  for (std::size_t i = 0; i < grid.dimension(); ++i) out += ",p_" + std::to_string(i + 1);
  out += ",gap_pure,gap_mixed\n";
  double worst_mixed = 0.0;
  double worst_pure = 0.0;
  for (std::size_t k = 0; k < spec.time_steps; ++k) {
    const double t = spec.time(k);
    const auto tensor = payoff_tensor(spec, t);
    for (std::size_t j = 0; j < grid.size(); ++j) {
      const auto p = grid.belief(j);
      const auto a = payoff_matrix(tensor, p);
      const double pure = isaacs_gap(a, StrategyClass::pure);
      const double mixed = isaacs_gap(a, StrategyClass::mixed);
      worst_pure = std::max(worst_pure, pure);
      worst_mixed = std::max(worst_mixed, mixed);
      out += std::to_string(k) + "," + io::format_real(t) + "," + std::to_string(j);
      for (std::size_t i = 0; i < p.size(); ++i) out += "," + io::format_real(p[i]);
      out += "," + io::format_real(pure) + "," + io::format_real(mixed) + "\n";
    }
  }
  io::write_file(path_in(cfg, "isaacs.csv"), out);
  CheckList checks;
  checks.add("isaacs_gap_mixed", worst_mixed, cfg.tol.envelope, worst_mixed <= cfg.tol.envelope);
  write_json(cfg, "isaacs_report.json",
             {{"max_gap_pure", worst_pure}, {"checks", checks.items}, {"passed", checks.all}});
  return checks.all ? 0 : 1;
}

inline int cmd_martingale(const RunConfig& cfg, const GameSpec& spec) {
  const auto vf = solve_backward(spec, {cfg.threads});
  io::export_value_csv(vf, path_in(cfg, "value.csv"));
  const double w0 = reference_value(vf);
  const auto m = extract_optimal_martingale(vf, spec.prior, cfg.force_terminal_reveal);
  io::export_martingale(m, path_in(cfg, "martingale.json"));
  const double cost = martingale_cost(spec, m);
  const auto mc = check_martingale(m, cfg.force_terminal_reveal ? nullptr : &vf.grid);
  CheckList checks;
  checks.add("attainment", std::abs(cost - w0), cfg.tol.identity, std::abs(cost - w0) <= cfg.tol.identity);
  checks.add("martingale_property", mc.martingale_residual, cfg.tol.envelope, mc.passed(cfg.tol.envelope));
  write_json(cfg, "attainment.json",
             {{"value_at_prior", w0},
              {"martingale_cost", cost},
              {"tree_nodes", m.nodes.size()},
              {"martingale", martingale_check_json(mc)},
              {"checks", checks.items},
              {"passed", checks.all}});
  return checks.all ? 0 : 1;
}

inline int cmd_simulate(const RunConfig& cfg, const GameSpec& spec) {
  const auto vf = solve_backward(spec, {cfg.threads});
  const double w0 = reference_value(vf);
  const auto m = extract_optimal_martingale(vf, spec.prior, cfg.force_terminal_reveal);
  const auto strategy = synthesize_strategy(vf, m);
  const auto res = simulate_play(spec, strategy, cfg.opponent, cfg.seed, cfg.samples, cfg.threads);
  const auto consts = payoff_constants(spec);
  const double band = std::max(3.0 * res.std_error, 5.0 * consts.sup_bound * spec.tau());
  // Against a best responder the mean estimates W; any other opponent can only do worse.
  const bool pass = cfg.opponent.kind == OpponentKind::best_response
                        ? std::abs(res.mean - w0) <= band
                        : res.mean <= w0 + band;
  const char* opp = cfg.opponent.kind == OpponentKind::best_response ? "best_response"
                    : cfg.opponent.kind == OpponentKind::uniform     ? "uniform"
                                                                     : "fixed";
  write_json(cfg, "simulation.json",
             {{"opponent", opp},
              {"seed", cfg.seed},
              {"samples", res.samples},
              {"mean", res.mean},
              {"std_error", res.std_error},
              {"reference_value", w0},
              {"band", band},
              {"verdict", pass ? "pass" : "fail"}});
  std::cout << (pass ? "PASS" : "FAIL") << " simulate: mean " << io::format_real(res.mean) << " +- "
            << io::format_real(res.std_error) << " vs W " << io::format_real(w0) << "\n";
  return pass ? 0 : 1;
}

inline int cmd_check(const RunConfig& cfg, const GameSpec& spec) {
  const auto vf = solve_backward(spec, {cfg.threads});
  io::export_value_csv(vf, path_in(cfg, "value.csv"));
  CheckList checks;

  double terminal = 0.0;
  for (double w : vf.values.back()) terminal = std::max(terminal, std::abs(w));
  checks.add("terminal_condition", terminal, 0.0, terminal == 0.0);

  const auto sub = verify_subsolution(vf, cfg.tol.residual, cfg.threads);
  checks.add("subsolution", sub.max_violation, sub.tolerance, sub.passed());
  const auto sup = verify_dual_supersolution(vf, cfg.tol.residual, cfg.tol.envelope, cfg.threads);
  checks.add("dual_supersolution_exposed", sup.exposed.max_violation, sup.exposed.tolerance, sup.exposed.passed());
  checks.add("vertex_equality", sup.vertex_equality_residual, sup.vertex_tolerance,
             sup.vertex_equality_residual <= sup.vertex_tolerance);

  const auto reg = regularity_report(vf, cfg.threads);
  checks.add("convexity", reg.convexity_residual, cfg.tol.envelope, reg.convexity_residual <= cfg.tol.envelope);
  checks.add("time_lipschitz", reg.max_time_increment, reg.time_increment_bound, reg.time_ok());
  checks.add("belief_lipschitz_excess", reg.belief_lipschitz_excess, 0.0, reg.belief_ok());

  const double dpp = dpp_residual(vf, cfg.threads);
  checks.add("one_step_dpp", dpp, cfg.tol.envelope, dpp <= cfg.tol.envelope);

  nlohmann::json extra{{"sup_bound", reg.sup_bound}, {"lip_x", reg.lip_x},
                       {"exposed_nodes_checked", sup.exposed.checked},
                       {"exposed_nodes_note", "exposed = envelope support is the node itself (grid analogue of extreme points)"}};
  if (const auto node = vf.grid.find(spec.prior)) {
    const double w0 = vf.values[0][*node];
    const auto m = extract_optimal_martingale(vf, spec.prior, cfg.force_terminal_reveal);
    io::export_martingale(m, path_in(cfg, "martingale.json"));
    const auto mc = check_martingale(m, cfg.force_terminal_reveal ? nullptr : &vf.grid);
    checks.add("martingale_property", mc.martingale_residual, cfg.tol.envelope, mc.passed(cfg.tol.envelope));
    const double gap = std::abs(martingale_cost(spec, m) - w0);
    checks.add("attainment", gap, cfg.tol.identity, gap <= cfg.tol.identity);
    extra["value_at_prior"] = w0;
    extra["terminal_revelation"] = mc.terminal_revelation;
    if (spec.num_types() == 2 && spec.grid_resolution <= 12 && spec.time_steps <= 8) {
      const double bf = brute_force_value(spec, spec.prior, 2);
      checks.add("brute_force_agreement", std::abs(bf - w0), cfg.tol.oracle, std::abs(bf - w0) <= cfg.tol.oracle);
    }
  } else {
    extra["value_at_prior"] = nullptr;
    extra["note"] = "prior is off the grid; martingale checks skipped";
  }
  write_json(cfg, "check.json", {{"checks", checks.items}, {"details", extra}, {"passed", checks.all}});
  return checks.all ? 0 : 1;
}

}  // namespace detail

/// Runs one command. Returns the process exit code: 0 on success (and all
/// checks within tolerance), 1 when a check fails, 2 on any error.
inline int run(const RunConfig& cfg, std::ostream& err = std::cerr) {
  try {
    cfg.validate();
    const auto spec = detail::load(cfg);
    std::filesystem::create_directories(cfg.out_dir);
    if (cfg.command == "solve") return detail::cmd_solve(cfg, spec);
    if (cfg.command == "hamiltonian") return detail::cmd_hamiltonian(cfg, spec);
    if (cfg.command == "isaacs") return detail::cmd_isaacs(cfg, spec);
    if (cfg.command == "martingale") return detail::cmd_martingale(cfg, spec);
    if (cfg.command == "simulate") return detail::cmd_simulate(cfg, spec);
    return detail::cmd_check(cfg, spec);
  } catch (const ParseError& e) {
    err << "asymgame: error[parse]: " << e.what() << "\n";
  } catch (const EvalError& e) {
    err << "asymgame: error[evaluation]: " << e.what() << "\n";
  } catch (const ConfigError& e) {
    err << "asymgame: error[config]: " << e.what() << "\n";
  } catch (const LpError& e) {
    err << "asymgame: error[lp]: " << e.what() << "\n";
  } catch (const LimitError& e) {
    err << "asymgame: error[limit]: " << e.what() << "\n";
  } catch (const std::exception& e) {
    err << "asymgame: error[io]: " << e.what() << "\n";
  }
  return 2;
}

}  // namespace asymgame::cli
