#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "asymgame/cli.hpp"

int main(int argc, char** argv) {
  using asymgame::cli::RunConfig;
  CLI::App app{"Value, optimal revelation and play for zero-sum games with one-sided information"};
  RunConfig cfg;
  std::size_t time_steps = 0;
  std::size_t grid = 0;
  std::string opponent = "best_response";

  app.add_option("command", cfg.command, "solve | hamiltonian | isaacs | martingale | simulate | check")
      ->required()
      ->check(CLI::IsMember(asymgame::cli::commands()));
  app.add_option("--spec", cfg.spec_path, "game config (YAML)")->required();
  app.add_option("--out", cfg.out_dir, "output directory")->capture_default_str();
  app.add_option("--time-steps", time_steps, "override time_steps")->check(CLI::PositiveNumber);
  app.add_option("--grid", grid, "override grid_resolution")->check(CLI::PositiveNumber);
  app.add_option("--seed", cfg.seed, "simulation seed")->capture_default_str();
  app.add_option("--samples", cfg.samples, "simulation samples")->capture_default_str();
  app.add_option("--threads", cfg.threads, "worker threads")->capture_default_str();
  app.add_option("--opponent", opponent, "best_response | uniform | fixed")
      ->check(CLI::IsMember({"best_response", "uniform", "fixed"}))
      ->capture_default_str();
  app.add_option("--fixed-action", cfg.opponent.fixed_action, "column index for --opponent fixed");
  app.add_option("--tol-envelope", cfg.tol.envelope, "envelope/LP tolerance")->capture_default_str();
  app.add_option("--tol-residual", cfg.tol.residual, "viscosity residual tolerance")->capture_default_str();
  app.add_option("--tol-identity", cfg.tol.identity, "attainment tolerance")->capture_default_str();
  app.add_option("--tol-oracle", cfg.tol.oracle, "brute-force agreement tolerance")->capture_default_str();
  app.add_flag("--force-terminal-reveal", cfg.force_terminal_reveal,
               "append costless vertex splits at the horizon");

  CLI11_PARSE(app, argc, argv);
  if (time_steps) cfg.time_steps = time_steps;
  if (grid) cfg.grid_resolution = grid;
  cfg.opponent.kind = opponent == "uniform" ? asymgame::OpponentKind::uniform
                      : opponent == "fixed" ? asymgame::OpponentKind::fixed
                                            : asymgame::OpponentKind::best_response;
  return asymgame::cli::run(cfg);
}
