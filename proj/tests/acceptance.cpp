// Acceptance gate: one PASS/FAIL line per criterion.
//
//   acceptance            run every criterion
//   acceptance NAME...    run the named ones
//   acceptance --list     print the names

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "fcl/baselines.hpp"
#include "fcl/environments.hpp"
#include "fcl/fcl_agent.hpp"
#include "fcl/harness.hpp"
#include "fcl/learning.hpp"
#include "fcl/matrix_solver.hpp"
#include "fcl/oracle.hpp"

#ifndef FCL_CONFIG_DIR
#define FCL_CONFIG_DIR "configs"
#endif

using namespace fcl;

namespace {

// Pinned tolerances.
constexpr double kExact = 1e-9;
constexpr double kLearnedTol = 1e-3;
constexpr std::size_t kMaxUpdates = 100000;
constexpr double kSymmetryTol = 1e-6;
constexpr double kFolkTol = 1e-9;
constexpr double kMatrixSlack = 0.05;  // learning-equilibrium and minimax-line slack, matrix games
constexpr double kGridSlack = 2.0;     // same, grid games
constexpr double kCakeShare = 1.0 / 3.0;
constexpr double kCakeTol = 0.03;
constexpr double kGradientTol = 1e-5;
constexpr double kLpTol = 1e-7;
constexpr std::uint64_t kReplicaSteps = 1000000;

// Runtime budgets in seconds.
constexpr double kOracleBudget = 1.0;
constexpr double kLearnedBudget = 30.0;
constexpr double kMatrixFigureBudget = 120.0;
constexpr double kGridFigureBudget = 900.0;

const std::vector<std::string> kMatrixGames = {"ipd", "aipd", "ich", "rps"};
const std::vector<std::string> kGridGames = {"grid_pd", "compromise", "coordination", "temptation"};

struct Verdict {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

bool near(double a, double b, double tol) { return std::abs(a - b) <= tol; }

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(4);
  os << x;
  return os.str();
}

StateId initial_state(const GameSpec& game) {
  const auto& mu = game.initial_dist();
  return static_cast<StateId>(std::max_element(mu.begin(), mu.end()) - mu.begin());
}

// ---------------------------------------------------------------------------

void oracle_exactness(Verdict& out) {
  const auto start = Clock::now();
  const auto ipd = compute_exact_values(build_game("ipd"));
  const auto ich = compute_exact_values(build_game("ich"));
  const auto rps = compute_exact_values(build_game("rps"));
  const auto aipd = compute_exact_values(build_game("aipd"));
  const double elapsed = seconds_since(start);

  // vd is not pinned for rps: any deviation from the symmetric profile pays there.
  auto check = [&](const ExactValues& v, double vc, double vr, std::optional<double> vd, std::optional<long> k) {
    for (const auto& p : v.players) {
      const bool ok = near(p.v_egalitarian, vc, kExact) && near(p.v_retaliate, vr, kExact) &&
                      (!vd || near(p.v_defect, *vd, kExact)) && p.k_retaliations == k;
      out.require(ok, v.game + " values");
    }
  };
  check(ipd, -1, -2, 0, 1);
  check(ich, 2, 1, 3, 1);
  check(rps, 0, 0, std::nullopt, std::nullopt);
  for (const auto& p : rps.players) out.require(p.coop_equals_retaliate, "rps V^c = V^r");
  for (const auto& p : aipd.players) out.require(near(p.v_egalitarian, 3.5, kExact), "aipd egalitarian 3.5");
  out.require(elapsed < kOracleBudget, "runtime");
  out.detail << "ipd (-1,-2,0,K=1) ich (2,1,3,K=1) rps (0,0,K=unbounded) aipd egalitarian "
             << fmt(aipd.players[0].v_egalitarian) << "; " << fmt(elapsed) << " s";
}

// ---------------------------------------------------------------------------

double max_abs_diff(const QTable& a, const QTable& b) {
  double worst = 0.0;
  for (std::size_t s = 0; s < a.num_states(); ++s)
    for (std::size_t c = 0; c < a.num_cols(); ++c) worst = std::max(worst, std::abs(a.at(s, c) - b.at(s, c)));
  return worst;
}

void learned_vs_oracle(Verdict& out) {
  for (const auto& name : kMatrixGames) {
    const auto start = Clock::now();
    const auto game = build_game(name);
    const std::size_t n = game.num_players();
    const auto exact = compute_exact_values(game);
    const auto coop = exact_cooperative_values(game);

    FclParams params{1.0, 1.0, 2024, {}};
    std::vector<std::unique_ptr<FCLAgent>> team;
    std::vector<Agent*> agents;
    for (std::size_t i = 0; i < n; ++i) {
      team.push_back(std::make_unique<FCLAgent>(game, i, params));
      agents.push_back(team.back().get());
    }
    Rng rng(7);
    std::uint64_t clock = 0;
    const std::size_t stages = kMaxUpdates / (10 * game.max_stage_steps());
    for (std::size_t t = 0; t < stages; ++t) run_stage(game, agents, t, rng, clock);
    out.require(clock <= kMaxUpdates, name + " update budget");

    double worst = 0.0;
    const StateId s0 = initial_state(game);
    for (const auto& agent : team) {
      const auto& st = agent->state();
      worst = std::max(worst, max_abs_diff(st.qc(), coop.q));
      for (std::size_t j = 0; j < n; ++j) {
        if (j == st.player()) continue;
        worst = std::max(worst, max_abs_diff(st.qr(j), exact_minimax_values(game, j).q));
        worst = std::max(worst, std::abs(st.defect_value(j, s0) - exact.players[j].v_defect));
      }
    }
    const double elapsed = seconds_since(start);
    out.require(worst <= kLearnedTol, name + " max-norm error");
    out.require(elapsed < kLearnedBudget, name + " runtime");
    out.detail << name << " err " << fmt(worst) << " after " << clock << " updates (" << fmt(elapsed) << " s); ";
  }
}

// ---------------------------------------------------------------------------

void symmetry_suite(Verdict& out) {
  Rng rng(3);
  double worst = 0.0;
  std::size_t checks = 0;
  for (const auto& name : list_games()) {
    const auto game = build_game(name);
    for (const auto& psi : all_permutations(game.num_players())) {
      for (int k = 0; k < 3; ++k) {
        const auto rep = check_symmetry(game, psi, random_profile(game, rng),
                                        static_cast<long>(game.max_stage_steps()));
        worst = std::max(worst, rep.max_deviation);
        out.require(rep.passed && rep.max_deviation < kSymmetryTol, name);
        ++checks;
      }
    }
  }
  out.detail << checks << " checks over " << list_games().size() << " games, max deviation " << worst;
}

// ---------------------------------------------------------------------------

void folk_inequality(Verdict& out) {
  const std::vector<std::string> games = {"ipd", "aipd", "ich", "grid_pd", "compromise",
                                          "coordination", "temptation", "cake"};
  double tightest = std::numeric_limits<double>::infinity();
  for (const auto& name : games) {
    const auto report = folk_inequality_check(compute_exact_values(build_game(name)));
    for (const auto& row : report.players) {
      out.require(row.holds && row.margin >= -kFolkTol, name);
      tightest = std::min(tightest, row.margin);
    }
  }
  out.detail << games.size() << " games, smallest margin " << fmt(tightest);
}

// ---------------------------------------------------------------------------

void egalitarian_theorem(Verdict& out) {
  for (const auto& name : list_games()) {
    const auto game = build_game(name);
    const auto rep = egalitarian_check(game);
    out.require(rep.equal_averages, name + " equal averages");
    const bool matrix = std::find(kMatrixGames.begin(), kMatrixGames.end(), name) != kMatrixGames.end();
    if (matrix) out.require(rep.exhaustive && rep.no_better_profile, name + " exhaustive profile scan");
    else out.require(rep.no_better_profile, name + " sampled profile scan");
    if (matrix) out.detail << name << " avg " << fmt(rep.averages[0]) << " vs best pure min "
                           << fmt(rep.best_profile_minimum) << "; ";
  }
}

// ---------------------------------------------------------------------------

struct Experiment {
  Summary summary;
  std::vector<ResultRow> rows;
  double seconds = 0.0;
};

Experiment run_config(const std::string& name) {
  auto config = load_config(std::string(FCL_CONFIG_DIR) + "/" + name + ".ini");
  config.output.clear();
  const auto start = Clock::now();
  auto result = run_experiment(config);
  Experiment e;
  e.seconds = seconds_since(start);
  e.summary = summarize(result.rows, config.window, config.late_fraction);
  e.rows = std::move(result.rows);
  return e;
}

double late_mean(const Experiment& e, std::size_t seat) { return e.summary.seats.at(seat).late_mean; }

void matrix_figure(Verdict& out) {
  const std::map<std::string, std::pair<double, double>> target = {
      {"ipd", {-1.0, 0.1}}, {"aipd", {3.5, 0.2}}, {"ich", {2.0, 0.1}}, {"rps", {0.0, 0.05}}};
  for (const auto& name : kMatrixGames) {
    const double minimax = compute_exact_values(build_game(name)).players[0].v_retaliate;
    const auto self = run_config(name + "_fcl");
    const auto ql = run_config(name + "_qlearning");
    const auto pg = run_config(name + "_pg");
    const double fcl_mean = late_mean(self, 0);
    const auto [want, tol] = target.at(name);
    out.require(near(fcl_mean, want, tol) && near(late_mean(self, 1), want, tol), name + " self-play");
    for (const auto* e : {&ql, &pg}) {
      const double m = late_mean(*e, 0);
      out.require(m <= fcl_mean + kMatrixSlack, name + " " + e->summary.seats[0].algo + " ordering");
      out.require(m >= minimax - kMatrixSlack, name + " " + e->summary.seats[0].algo + " minimax line");
    }
    const double secs = self.seconds + ql.seconds + pg.seconds;
    out.require(secs <= kMatrixFigureBudget, name + " runtime");
    out.detail << name << " fcl " << fmt(fcl_mean) << " q " << fmt(late_mean(ql, 0)) << " pg "
               << fmt(late_mean(pg, 0)) << " line " << fmt(minimax) << " (" << fmt(secs) << " s); ";
  }
}

void grid_figure(Verdict& out, const std::string& name) {
  const double minimax = compute_exact_values(build_game(name)).players[0].v_retaliate;
  const auto self = run_config(name + "_fcl");
  const auto ql = run_config(name + "_qlearning");
  const auto pg = run_config(name + "_pg");
  const double fcl_mean = late_mean(self, 0);
  out.require(fcl_mean >= minimax - kGridSlack, name + " self-play above the minimax line");
  for (const auto* e : {&ql, &pg}) {
    const double m = late_mean(*e, 0);
    out.require(m <= fcl_mean + kGridSlack, name + " " + e->summary.seats[0].algo + " ordering");
    out.require(m >= minimax - kGridSlack, name + " " + e->summary.seats[0].algo + " minimax line");
  }
  const double secs = self.seconds + ql.seconds + pg.seconds;
  out.require(secs <= kGridFigureBudget, name + " runtime");
  out.detail << name << " fcl " << fmt(fcl_mean) << " q " << fmt(late_mean(ql, 0)) << " pg "
             << fmt(late_mean(pg, 0)) << " line " << fmt(minimax) << " (" << fmt(secs) << " s); ";
}

void grid_figure_all(Verdict& out) {
  for (const auto& name : kGridGames) grid_figure(out, name);
}

double final_average(const Experiment& e, std::size_t seat) {
  std::size_t last = 0;
  for (const auto& r : e.rows) last = std::max(last, r.stage);
  double total = 0.0;
  std::size_t runs = 0;
  for (const auto& r : e.rows)
    if (r.seat == seat && r.stage == last) {
      total += r.cum_avg;
      ++runs;
    }
  return total / static_cast<double>(runs);
}

void cake_figure(Verdict& out) {
  const auto ql = run_config("cake_qlearning");
  const auto robber = run_config("cake_always_defect");
  const double q = late_mean(ql, 0);
  const double rob = final_average(robber, 0);
  out.require(near(q, kCakeShare, kCakeTol), "q-learning share");
  out.require(rob < kCakeShare, "always-rob average");
  out.detail << "q-learning late mean " << fmt(q) << ", always-rob long-run average " << fmt(rob);
}

// ---------------------------------------------------------------------------

void gradient_check(Verdict& out) {
  Rng rng(5);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    SoftmaxPolicy policy{3, 4, {}};
    for (std::size_t k = 0; k < 12; ++k) policy.logits.push_back(u(rng));
    std::vector<EpisodeStep> episode;
    for (int k = 0; k < 8; ++k)
      episode.push_back({static_cast<StateId>(rng() % 3), static_cast<ActionId>(rng() % 4), u(rng)});
    const double gamma = trial % 2 ? 1.0 : 0.9;
    const auto grad = reinforce_gradient(policy, episode, gamma);
    double diff = 0.0, norm = 0.0;
    for (std::size_t k = 0; k < grad.size(); ++k) {
      const double h = 1e-5;
      auto plus = policy, minus = policy;
      plus.logits[k] += h;
      minus.logits[k] -= h;
      const double fd =
          (reinforce_objective(plus, episode, gamma) - reinforce_objective(minus, episode, gamma)) / (2 * h);
      diff += (fd - grad[k]) * (fd - grad[k]);
      norm += grad[k] * grad[k];
    }
    worst = std::max(worst, std::sqrt(diff) / std::max(std::sqrt(norm), 1e-12));
  }
  out.require(worst <= kGradientTol, "policy gradient");
  out.detail << "pg gradient rel err " << worst << "; ";
}

void lp_duality(Verdict& out) {
  Rng rng(9);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  double worst = 0.0;
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t rows = 1 + rng() % 6, cols = 1 + rng() % 6;
    MatrixView m(rows, cols);
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < cols; ++c) m(r, c) = u(rng);
    const auto sol = solve_maxmin(m);
    out.require(is_distribution(sol.row_strategy) && is_distribution(sol.col_strategy), "distributions");
    double row_guarantee = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < cols; ++c) {
      double v = 0.0;
      for (std::size_t r = 0; r < rows; ++r) v += sol.row_strategy[r] * m(r, c);
      row_guarantee = std::min(row_guarantee, v);
    }
    double col_guarantee = -std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < rows; ++r) {
      double v = 0.0;
      for (std::size_t c = 0; c < cols; ++c) v += sol.col_strategy[c] * m(r, c);
      col_guarantee = std::max(col_guarantee, v);
    }
    const double gap = std::max(std::abs(row_guarantee - sol.value), std::abs(col_guarantee - sol.value));
    worst = std::max(worst, gap);
  }
  out.require(worst <= kLpTol, "lp duality");
  out.detail << "lp duality gap " << worst << " over 500 games; ";
}

void csv_determinism(Verdict& out) {
  for (const std::string name : {"ipd_pg", "cake_qlearning", "grid_pd_qlearning"}) {
    auto config = load_config(std::string(FCL_CONFIG_DIR) + "/" + name + ".ini");
    config.output.clear();
    config.num_runs = 3;
    config.num_stages = 300;
    std::string text[2];
    for (int k = 0; k < 2; ++k) {
      config.threads = k + 1;
      std::ostringstream os;
      write_csv(os, run_experiment(config).rows);
      text[k] = os.str();
    }
    out.require(text[0] == text[1] && !text[0].empty(), name + " csv bytes");
  }
  out.detail << "csv byte-identical across reruns; ";
}

void exploration_replicas(Verdict& out) {
  ExplorationProcess a(1.0, 1.0 - 1e-6, 77), b(1.0, 1.0 - 1e-6, 77);
  std::uint64_t explored = 0;
  bool agree = true;
  for (std::uint64_t t = 0; t < kReplicaSteps && agree; ++t) {
    const bool x = a.explore_now(t);
    agree = x == b.explore_now(t);
    if (x) {
      ++explored;
      for (std::size_t seat = 0; seat < 3; ++seat) {
        const auto ch = ExplorationProcess::kActionChannel + seat;
        agree = agree && a.stream().uniform_index(t, ch, 5) == b.stream().uniform_index(t, ch, 5);
      }
    }
  }
  out.require(agree, "replica agreement");
  out.require(explored > 0 && explored < kReplicaSteps, "both branches taken");
  out.detail << "replicas agree on " << kReplicaSteps << " steps (" << explored << " explorations)";
}

void property_suites(Verdict& out) {
  gradient_check(out);
  lp_duality(out);
  csv_determinism(out);
  exploration_replicas(out);
}

// ---------------------------------------------------------------------------

const std::vector<std::pair<std::string, std::function<void(Verdict&)>>>& criteria() {
  static const std::vector<std::pair<std::string, std::function<void(Verdict&)>>> all = {
      {"oracle_exactness", oracle_exactness},
      {"learned_vs_oracle", learned_vs_oracle},
      {"symmetry_suite", symmetry_suite},
      {"folk_inequality", folk_inequality},
      {"egalitarian_profiles", egalitarian_theorem},
      {"matrix_figure", matrix_figure},
      {"grid_figure", grid_figure_all},
      {"cake_figure", cake_figure},
      {"property_suites", property_suites},
  };
  return all;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> wanted(argv + 1, argv + argc);
  if (wanted.size() == 1 && wanted[0] == "--list") {
    for (const auto& [name, fn] : criteria()) std::cout << name << '\n';
    return 0;
  }
  for (const auto& w : wanted) {
    const auto& all = criteria();
    if (std::none_of(all.begin(), all.end(), [&](const auto& c) { return c.first == w; })) {
      std::cerr << "unknown criterion '" << w << "'\n";
      return 2;
    }
  }
  int failures = 0;
  for (const auto& [name, fn] : criteria()) {
    if (!wanted.empty() && std::find(wanted.begin(), wanted.end(), name) == wanted.end()) continue;
    Verdict out;
    try {
      fn(out);
    } catch (const std::exception& e) {
      out.pass = false;
      out.detail << " [exception: " << e.what() << "]";
    }
    std::cout << (out.pass ? "PASS " : "FAIL ") << name << ": " << out.detail.str() << std::endl;
    failures += out.pass ? 0 : 1;
  }
  return failures == 0 ? 0 : 1;
}
