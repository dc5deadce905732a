#include <sstream>

#include "doctest.h"
#include "fcl/environments.hpp"
#include "fcl/game_io.hpp"
#include "fcl/harness.hpp"

using namespace fcl;

namespace {

const char* kIpd = R"(
# two learners
[experiment]
game = ipd
runs = 3
stages = 40
seed = 7

[seat.0]
algo = qlearning

[seat.1]
algo = fcl
epsilon = 1
decay = 0.95
)";

}  // namespace

TEST_CASE("config parsing") {
  const auto cfg = parse_config(kIpd);
  CHECK(cfg.game == "ipd");
  CHECK(cfg.num_runs == 3);
  CHECK(cfg.seats.size() == 2);
  CHECK(cfg.seats[1].decay == 0.95);
  CHECK(parse_config(cfg.canonical()).canonical() == cfg.canonical());
  CHECK(config_hash(cfg) == config_hash(parse_config(cfg.canonical())));
  auto other = cfg;
  other.seed = 8;
  CHECK(config_hash(other) != config_hash(cfg));
}

TEST_CASE("config errors") {
  CHECK_THROWS_AS(parse_config("[experiment]\nruns = 2\n[seat.0]\nalgo = fcl\n"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config("[experiment]\ngame = ipd\nspeed = 3\n"), doctest::Contains("line 3"),
                       ConfigError);
  CHECK_THROWS_AS(parse_config("[experiment]\ngame = ipd\n[seat.0]\nalgo = sarsa\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[experiment]\ngame = ipd\n[seat.0]\nepsilon = 2\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[experiment]\ngame = ipd\n[seat.1]\nalgo = fcl\n"), ConfigError);

  const auto cake = parse_config("[experiment]\ngame = cake\n[seat.0]\nalgo = fcl\n[seat.1]\nalgo = fcl\n");
  CHECK_THROWS_WITH_AS(resolve_game(cake), doctest::Contains("3 players"), ConfigError);
  auto bad_fixed = parse_config(kIpd);
  bad_fixed.seats[0].algo = "fixed:5";
  CHECK_THROWS_AS(resolve_game(bad_fixed), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/config.ini"), ConfigError);
}

TEST_CASE("experiments are reproducible") {
  auto cfg = parse_config(kIpd);
  const auto a = run_experiment(cfg);
  cfg.threads = 1;
  const auto b = run_experiment(cfg);
  std::ostringstream sa, sb;
  write_csv(sa, a.rows);
  write_csv(sb, b.rows);
  CHECK(sa.str() == sb.str());
  CHECK(a.rows.size() == 3 * 40 * 2);
  CHECK(a.runs.size() == 3);
  CHECK(cumulative_averages_consistent(a.rows));
  CHECK(sa.str().rfind(kCsvHeader, 0) == 0);

  std::istringstream in(sa.str());
  const auto back = read_csv(in);
  REQUIRE(back.size() == a.rows.size());
  for (std::size_t k = 0; k < back.size(); ++k) {
    CHECK(back[k].stage_return == a.rows[k].stage_return);
    CHECK(back[k].cum_avg == a.rows[k].cum_avg);
    CHECK(back[k].algo == a.rows[k].algo);
  }
}

TEST_CASE("summaries") {
  std::vector<ResultRow> rows;
  for (std::size_t run = 0; run < 2; ++run) {
    double total = 0.0;
    for (std::size_t t = 0; t < 10; ++t) {
      const double r = run == 0 ? static_cast<double>(t) : 1.0;
      total += r;
      rows.push_back({run, t, 0, "fcl", r, total / static_cast<double>(t + 1)});
    }
  }
  const auto s = summarize(rows, 1, 0.2);
  REQUIRE(s.seats.size() == 1);
  CHECK(s.late_window_start == 8);
  // run 0 averages 8.5 over stages 8-9, run 1 averages 1
  CHECK(s.seats[0].late_mean == doctest::Approx(4.75));
  CHECK(s.seats[0].late_stderr == doctest::Approx(3.75));
  CHECK(s.seats[0].curve[3].mean == doctest::Approx(2.0));
  CHECK(s.seats[0].runs == 2);

  rows[4].cum_avg += 1.0;
  CHECK_FALSE(cumulative_averages_consistent(rows));
}

TEST_CASE("game descriptions round trip") {
  for (const auto& name : list_games()) {
    CAPTURE(name);
    const auto game = build_game(name);
    std::ostringstream first;
    write_game(first, game);
    std::istringstream in(first.str());
    const auto back = read_game(in);
    std::ostringstream second;
    write_game(second, back);
    CHECK(first.str() == second.str());
    CHECK(back.num_players() == game.num_players());
  }
  std::istringstream bad("game x\nplayers 2\nstates one\n");
  CHECK_THROWS_WITH_AS(read_game(bad), doctest::Contains("line 3"), ParseError);
}
