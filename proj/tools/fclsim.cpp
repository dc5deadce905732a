#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "fcl/environments.hpp"
#include "fcl/game_io.hpp"
#include "fcl/harness.hpp"
#include "fcl/oracle.hpp"

namespace {

fcl::GameSpec game_by_name_or_file(const std::string& name) {
  if (name.find('/') != std::string::npos || name.ends_with(".game")) return fcl::load_game_file(name);
  return fcl::build_game(name);
}

int cmd_run(const std::string& config_path, const std::string& output, std::size_t window) {
  auto config = fcl::load_config(config_path);
  if (!output.empty()) config.output = output;
  if (window > 0) config.window = window;
  const auto game = fcl::resolve_game(config);
  const auto result = fcl::run_experiment(config);
  auto summary = fcl::summarize(result.rows, config.window, config.late_fraction);
  try {
    summary.minimax_line = fcl::compute_exact_values(game, config.gamma).players.at(0).v_retaliate;
  } catch (const fcl::CapacityError&) {
  }
  double wall = 0.0;
  std::size_t retaliations = 0;
  for (const auto& r : result.runs) {
    wall += r.wall_seconds;
    retaliations += r.retaliations.size();
  }
  std::cout << "game " << game.name() << ", " << config.num_runs << " runs x " << config.num_stages
            << " stages, config hash " << std::hex << fcl::config_hash(config) << std::dec << '\n';
  std::cout << fcl::format_summary(summary);
  std::cout << "retaliation events " << retaliations << ", run time " << wall << " s\n";
  if (!config.output.empty()) std::cout << "wrote " << config.output << '\n';
  return 0;
}

int cmd_oracle(const std::string& name) {
  const auto game = game_by_name_or_file(name);
  std::cout << fcl::format_report(fcl::compute_exact_values(game));
  return 0;
}

int cmd_verify(const std::string& name) {
  const auto game = game_by_name_or_file(name);
  bool ok = true;
  fcl::Rng rng(1);
  double worst = 0.0;
  bool symmetric = true;
  const auto perms = game.num_players() <= 6 ? fcl::all_permutations(game.num_players())
                                             : std::vector<fcl::PlayerPermutation>{fcl::cyclic_permutation(game.num_players())};
  for (const auto& psi : perms)
    for (int k = 0; k < 3; ++k) {
      const auto rep = fcl::check_symmetry(game, psi, fcl::random_profile(game, rng),
                                           static_cast<long>(game.max_stage_steps()));
      worst = std::max(worst, rep.max_deviation);
      symmetric = symmetric && rep.passed;
    }
  std::cout << "symmetry: " << (symmetric ? "pass" : "FAIL") << " (max deviation " << worst << ")\n";
  ok = ok && symmetric;

  const auto values = fcl::compute_exact_values(game);
  const auto folk = fcl::folk_inequality_check(values);
  for (std::size_t p = 0; p < folk.players.size(); ++p) {
    const auto& row = folk.players[p];
    std::cout << "folk inequality player " << p << ": ";
    if (row.unbounded)
      std::cout << "V^c = V^r, retaliation count UNBOUNDED";
    else
      std::cout << (row.holds ? "pass" : "FAIL") << " (K=" << *row.k << ", margin " << row.margin << ")";
    std::cout << '\n';
  }
  ok = ok && folk.passed();

  const auto egal = fcl::egalitarian_check(game);
  std::cout << "egalitarian: " << (egal.passed() ? "pass" : "FAIL") << " (averages";
  for (double a : egal.averages) std::cout << ' ' << a;
  std::cout << "; best pure profile minimum " << egal.best_profile_minimum << " over " << egal.profiles_checked
            << (egal.exhaustive ? " profiles, exhaustive)" : " sampled profiles)") << '\n';
  ok = ok && egal.passed();
  return ok ? 0 : 1;
}

int cmd_export(const std::string& name, const std::string& output) {
  const auto game = fcl::build_game(name);
  if (output.empty()) {
    fcl::write_game(std::cout, game);
  } else {
    std::ofstream out(output);
    if (!out) throw std::runtime_error("cannot write '" + output + "'");
    fcl::write_game(out, game);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulator for repeated symmetric stochastic games with foolproof cooperative learning"};
  app.require_subcommand(1);

  std::string config_path, output, game_name, export_out;
  std::size_t window = 0;

  auto* run = app.add_subcommand("run", "Run an experiment described by a config file");
  run->add_option("--config", config_path, "Experiment config")->required();
  run->add_option("--output", output, "CSV path (overrides the config)");
  run->add_option("--window", window, "Moving-average window for the summary");

  auto* oracle = app.add_subcommand("oracle", "Print exact cooperative, minimax and defection values");
  oracle->add_option("--game", game_name, "Bundled game name or description file")->required();

  auto* verify = app.add_subcommand("verify", "Check symmetry, folk inequality and egalitarian optimality");
  verify->add_option("--game", game_name, "Bundled game name or description file")->required();

  auto* list = app.add_subcommand("list-games", "List bundled games");

  auto* exp = app.add_subcommand("export-game", "Write a bundled game as a description file");
  exp->add_option("--game", game_name, "Bundled game name")->required();
  exp->add_option("--output", export_out, "Output path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*run) return cmd_run(config_path, output, window);
    if (*oracle) return cmd_oracle(game_name);
    if (*verify) return cmd_verify(game_name);
    if (*list) {
      for (const auto& n : fcl::list_games()) std::cout << n << '\n';
      return 0;
    }
    if (*exp) return cmd_export(game_name, export_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
