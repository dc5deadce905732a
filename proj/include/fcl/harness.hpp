#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fcl/game.hpp"
#include "fcl/learning.hpp"

namespace fcl {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One seat's agent: algorithm name plus its parameters.
struct AgentSpec {
  std::string algo = "fcl";  // fcl | qlearning | pg | always_defect | always_cooperate | fixed:<k> | random
  double epsilon = 0.5;
  double decay = 0.9;
  std::uint64_t seed_offset = 0;
  double learning_rate = 0.1;  // pg only
};

struct ExperimentConfig {
  std::string game;       // bundled name
  std::string game_file;  // or a description file
  std::vector<AgentSpec> seats;
  std::size_t num_runs = 20;
  std::size_t num_stages = 2000;
  std::uint64_t seed = 1;
  double gamma = 1.0;
  int retaliation_bonus = 1;
  RateKey rate_key = RateKey::kStateAction;
  std::string output;           // CSV path; empty means no file
  std::size_t window = 1;       // moving-average window for summaries
  double late_fraction = 0.1;   // tail of stages used for late-window means
  std::size_t threads = 0;      // 0: hardware concurrency

  /// Canonical text form, also the input of the config hash.
  std::string canonical() const;
};

// Config grammar (INI style, '#' or ';' comments):
//
//   [experiment]
//   game = ipd              | game_file = path
//   runs = 20
//   stages = 2000
//   seed = 1
//   gamma = 1
//   bonus = 1
//   rate_key = state_action | state
//   output = results/ipd.csv
//   window = 50
//   late_fraction = 0.1
//   threads = 0
//
//   [seat.0]
//   algo = fcl
//   epsilon = 0.5
//   decay = 0.9
//   seed_offset = 0
//   learning_rate = 0.1
//
// Every seat of the game needs its own [seat.N] section.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

/// Resolves the config's game and checks the seat count.
GameSpec resolve_game(const ExperimentConfig& config);
void validate_config(const ExperimentConfig& config, const GameSpec& game);

struct ResultRow {
  std::size_t run = 0;
  std::size_t stage = 0;
  std::size_t seat = 0;
  std::string algo;
  double stage_return = 0.0;
  double cum_avg = 0.0;
};

struct RetaliationLog {
  std::size_t seat = 0;  // the FCL agent that reacted
  std::size_t stage = 0;
  std::size_t defector = 0;
};

struct RunRecord {
  std::uint64_t config_hash = 0;
  std::uint64_t seed = 0;
  std::size_t run = 0;
  double wall_seconds = 0.0;
  std::vector<double> final_averages;
  std::vector<RetaliationLog> retaliations;
};

struct ExperimentResult {
  std::vector<ResultRow> rows;  // ordered by (run, stage, seat)
  std::vector<RunRecord> runs;
};

std::uint64_t config_hash(const ExperimentConfig& config);
/// Seed of run r; every random stream of the run derives from it.
std::uint64_t run_seed(const ExperimentConfig& config, std::size_t run);

std::vector<std::unique_ptr<Agent>> make_agents(const ExperimentConfig& config, const GameSpec& game,
                                                std::uint64_t seed);

/// Plays one run. Rows for this run are appended to `rows`.
RunRecord run_match(const ExperimentConfig& config, const GameSpec& game, std::size_t run,
                    std::vector<ResultRow>& rows);

ExperimentResult run_experiment(const ExperimentConfig& config);

inline constexpr const char* kCsvHeader = "run,stage,seat,algo,stage_return,cum_avg";
void write_csv(std::ostream& os, const std::vector<ResultRow>& rows);
void write_csv_file(const std::string& path, const std::vector<ResultRow>& rows);
std::vector<ResultRow> read_csv(std::istream& is);

struct CurvePoint {
  std::size_t stage = 0;
  double mean = 0.0;
  double stderr_ = 0.0;
};

struct SeatSummary {
  std::size_t seat = 0;
  std::string algo;
  std::vector<CurvePoint> curve;  // moving average of the cross-run mean when window > 1
  double late_mean = 0.0;         // mean over runs of each run's late-window average
  double late_stderr = 0.0;
  std::size_t runs = 0;
};

struct Summary {
  std::vector<SeatSummary> seats;
  std::size_t late_window_start = 0;
  std::optional<double> minimax_line;
};

/// Cross-run mean and standard error per seat and stage.
Summary summarize(const std::vector<ResultRow>& rows, std::size_t window = 1, double late_fraction = 0.1);

std::string format_summary(const Summary& summary);

/// Checks that every cum_avg equals the running mean of stage_return.
bool cumulative_averages_consistent(const std::vector<ResultRow>& rows, double tol = 1e-9);

}  // namespace fcl
