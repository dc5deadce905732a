#include "fcl/harness.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <thread>

#include "fcl/baselines.hpp"
#include "fcl/environments.hpp"
#include "fcl/fcl_agent.hpp"
#include "fcl/game_io.hpp"

namespace fcl {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

[[noreturn]] void fail_at(std::size_t line, const std::string& what) {
  throw ConfigError("config line " + std::to_string(line) + ": " + what);
}

template <typename T>
T parse_number(const std::string& text, std::size_t line, const std::string& key) {
  T value{};
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) fail_at(line, "bad value '" + text + "' for " + key);
  return value;
}

std::string format_double(double x) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, ptr);
}

std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive(std::uint64_t seed, std::uint64_t tag) { return mix(seed ^ mix(tag)); }

constexpr std::uint64_t kEnvTag = 0xe1;
constexpr std::uint64_t kTeamTag = 0xfc1;
constexpr std::uint64_t kSeatTag = 0x5ea7;

}  // namespace

std::string ExperimentConfig::canonical() const {
  std::ostringstream os;
  os << std::setprecision(17);
  os << "[experiment]\n";
  if (!game.empty()) os << "game = " << game << '\n';
  if (!game_file.empty()) os << "game_file = " << game_file << '\n';
  os << "runs = " << num_runs << "\nstages = " << num_stages << "\nseed = " << seed << "\ngamma = " << gamma
     << "\nbonus = " << retaliation_bonus << "\nrate_key = " << (rate_key == RateKey::kState ? "state" : "state_action")
     << "\nlate_fraction = " << late_fraction << '\n';
  for (std::size_t i = 0; i < seats.size(); ++i) {
    const auto& s = seats[i];
    os << "[seat." << i << "]\nalgo = " << s.algo << "\nepsilon = " << s.epsilon << "\ndecay = " << s.decay
       << "\nseed_offset = " << s.seed_offset << "\nlearning_rate = " << s.learning_rate << '\n';
  }
  return os.str();
}

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig cfg;
  std::map<std::size_t, AgentSpec> seats;
  std::istringstream in(text);
  std::string raw;
  std::size_t line = 0;
  std::string section;
  std::size_t seat = 0;
  bool seen_experiment = false;
  while (std::getline(in, raw)) {
    ++line;
    const auto comment = raw.find_first_of("#;");
    const std::string body = trim(comment == std::string::npos ? raw : raw.substr(0, comment));
    if (body.empty()) continue;
    if (body.front() == '[') {
      if (body.back() != ']') fail_at(line, "unterminated section header");
      section = trim(std::string_view(body).substr(1, body.size() - 2));
      if (section == "experiment") {
        seen_experiment = true;
      } else if (section.starts_with("seat.")) {
        seat = parse_number<std::size_t>(section.substr(5), line, "seat index");
        if (seats.count(seat)) fail_at(line, "duplicate section [" + section + "]");
        seats[seat] = AgentSpec{};
      } else {
        fail_at(line, "unknown section [" + section + "]");
      }
      continue;
    }
    const auto eq = body.find('=');
    if (eq == std::string::npos) fail_at(line, "expected key = value");
    const std::string key = trim(std::string_view(body).substr(0, eq));
    const std::string value = trim(std::string_view(body).substr(eq + 1));
    if (value.empty()) fail_at(line, "empty value for " + key);
    if (section.empty()) fail_at(line, "key outside of a section");

    if (section == "experiment") {
      if (key == "game") cfg.game = value;
      else if (key == "game_file") cfg.game_file = value;
      else if (key == "runs") cfg.num_runs = parse_number<std::size_t>(value, line, key);
      else if (key == "stages") cfg.num_stages = parse_number<std::size_t>(value, line, key);
      else if (key == "seed") cfg.seed = parse_number<std::uint64_t>(value, line, key);
      else if (key == "gamma") cfg.gamma = parse_number<double>(value, line, key);
      else if (key == "bonus") cfg.retaliation_bonus = parse_number<int>(value, line, key);
      else if (key == "output") cfg.output = value;
      else if (key == "window") cfg.window = parse_number<std::size_t>(value, line, key);
      else if (key == "late_fraction") cfg.late_fraction = parse_number<double>(value, line, key);
      else if (key == "threads") cfg.threads = parse_number<std::size_t>(value, line, key);
      else if (key == "rate_key") {
        if (value == "state") cfg.rate_key = RateKey::kState;
        else if (value == "state_action") cfg.rate_key = RateKey::kStateAction;
        else fail_at(line, "rate_key must be 'state' or 'state_action'");
      } else {
        fail_at(line, "unknown key '" + key + "' in [experiment]");
      }
    } else {
      AgentSpec& spec = seats[seat];
      if (key == "algo") spec.algo = value;
      else if (key == "epsilon") spec.epsilon = parse_number<double>(value, line, key);
      else if (key == "decay") spec.decay = parse_number<double>(value, line, key);
      else if (key == "seed_offset") spec.seed_offset = parse_number<std::uint64_t>(value, line, key);
      else if (key == "learning_rate") spec.learning_rate = parse_number<double>(value, line, key);
      else fail_at(line, "unknown key '" + key + "' in [" + section + "]");
    }
  }
  if (!seen_experiment) throw ConfigError("config lacks an [experiment] section");
  for (std::size_t i = 0; i < seats.size(); ++i) {
    auto it = seats.find(i);
    if (it == seats.end()) throw ConfigError("seats must be numbered 0.." + std::to_string(seats.size() - 1));
    cfg.seats.push_back(it->second);
  }
  if (cfg.game.empty() == cfg.game_file.empty())
    throw ConfigError("game: exactly one of 'game' and 'game_file' must be set");
  if (cfg.num_runs < 1) throw ConfigError("runs: must be at least 1");
  if (cfg.num_stages < 1) throw ConfigError("stages: must be at least 1");
  if (!(cfg.gamma >= 0.0 && cfg.gamma <= 1.0)) throw ConfigError("gamma: must lie in [0, 1]");
  if (cfg.retaliation_bonus < 0) throw ConfigError("bonus: must be non-negative");
  if (!(cfg.late_fraction > 0.0 && cfg.late_fraction <= 1.0)) throw ConfigError("late_fraction: must lie in (0, 1]");
  if (cfg.window < 1) throw ConfigError("window: must be at least 1");
  for (std::size_t i = 0; i < cfg.seats.size(); ++i) {
    const auto& s = cfg.seats[i];
    const std::string where = "seat." + std::to_string(i) + ".";
    if (!(s.epsilon >= 0.0 && s.epsilon <= 1.0)) throw ConfigError(where + "epsilon: must lie in [0, 1]");
    if (!(s.decay > 0.0 && s.decay <= 1.0)) throw ConfigError(where + "decay: must lie in (0, 1]");
    if (!(s.learning_rate > 0.0)) throw ConfigError(where + "learning_rate: must be positive");
    const bool known = s.algo == "fcl" || s.algo == "qlearning" || s.algo == "pg" || s.algo == "always_defect" ||
                       s.algo == "always_cooperate" || s.algo == "random" || s.algo.starts_with("fixed:");
    if (!known) throw ConfigError(where + "algo: unknown algorithm '" + s.algo + "'");
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

GameSpec resolve_game(const ExperimentConfig& config) {
  GameSpec game = config.game_file.empty() ? build_game(config.game) : load_game_file(config.game_file);
  validate_config(config, game);
  return game;
}

void validate_config(const ExperimentConfig& config, const GameSpec& game) {
  if (config.seats.size() != game.num_players())
    throw ConfigError("seats: game '" + game.name() + "' has " + std::to_string(game.num_players()) +
                      " players but the config defines " + std::to_string(config.seats.size()) + " seats");
  for (std::size_t i = 0; i < config.seats.size(); ++i) {
    const auto& algo = config.seats[i].algo;
    if (!algo.starts_with("fixed:")) continue;
    std::size_t k = 0;
    const auto digits = algo.substr(6);
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), k);
    if (ec != std::errc() || ptr != digits.data() + digits.size() || k >= game.num_actions(i))
      throw ConfigError("seat." + std::to_string(i) + ".algo: bad fixed action in '" + algo + "'");
  }
}

std::uint64_t config_hash(const ExperimentConfig& config) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : config.canonical()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t run_seed(const ExperimentConfig& config, std::size_t run) { return derive(config.seed, run); }

std::vector<std::unique_ptr<Agent>> make_agents(const ExperimentConfig& config, const GameSpec& game,
                                                std::uint64_t seed) {
  LearningParams learning;
  learning.gamma = config.gamma;
  learning.retaliation_bonus = config.retaliation_bonus;
  learning.rate_key = config.rate_key;
  std::vector<std::unique_ptr<Agent>> agents;
  for (std::size_t i = 0; i < config.seats.size(); ++i) {
    const AgentSpec& s = config.seats[i];
    const std::uint64_t own = derive(seed, kSeatTag + i + (s.seed_offset << 8));
    if (s.algo == "fcl") {
      FclParams p{s.epsilon, s.decay, derive(seed, kTeamTag + s.seed_offset), learning};
      agents.push_back(std::make_unique<FCLAgent>(game, i, p));
    } else if (s.algo == "qlearning") {
      agents.push_back(std::make_unique<SelfishQAgent>(game, i, SelfishParams{s.epsilon, s.decay, own, learning}));
    } else if (s.algo == "pg") {
      AdamParams adam;
      adam.learning_rate = s.learning_rate;
      agents.push_back(std::make_unique<PGAgent>(game, i, own, config.gamma, adam));
    } else if (s.algo == "always_cooperate") {
      agents.push_back(std::make_unique<FixedAgent>(s.algo, 0));
    } else if (s.algo == "always_defect") {
      require(game.num_actions(i) > 1, "always_defect needs a second action");
      agents.push_back(std::make_unique<FixedAgent>(s.algo, 1));
    } else if (s.algo.starts_with("fixed:")) {
      agents.push_back(std::make_unique<FixedAgent>(s.algo, std::stoul(s.algo.substr(6))));
    } else if (s.algo == "random") {
      agents.push_back(std::make_unique<RandomAgent>(game, i, own));
    } else {
      throw ConfigError("unknown algorithm '" + s.algo + "'");
    }
  }
  return agents;
}

RunRecord run_match(const ExperimentConfig& config, const GameSpec& game, std::size_t run,
                    std::vector<ResultRow>& rows) {
  const auto start = std::chrono::steady_clock::now();
  const std::uint64_t seed = run_seed(config, run);
  auto owned = make_agents(config, game, seed);
  std::vector<Agent*> agents;
  for (auto& a : owned) agents.push_back(a.get());

  const std::size_t n = game.num_players();
  Rng env(derive(seed, kEnvTag));
  std::uint64_t clock = 0;
  std::vector<double> sums(n, 0.0);
  rows.reserve(rows.size() + config.num_stages * n);
  for (std::size_t t = 0; t < config.num_stages; ++t) {
    const auto rec = run_stage(game, agents, t, env, clock, config.gamma);
    for (std::size_t i = 0; i < n; ++i) {
      sums[i] += rec.stage_returns[i];
      rows.push_back({run, t, i, config.seats[i].algo, rec.stage_returns[i], sums[i] / static_cast<double>(t + 1)});
    }
  }

  RunRecord record;
  record.config_hash = config_hash(config);
  record.seed = seed;
  record.run = run;
  for (std::size_t i = 0; i < n; ++i) record.final_averages.push_back(sums[i] / static_cast<double>(config.num_stages));
  for (std::size_t i = 0; i < n; ++i)
    if (const auto* f = dynamic_cast<const FCLAgent*>(agents[i]))
      for (const auto& ev : f->state().events()) record.retaliations.push_back({i, ev.stage, ev.defector});
  record.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return record;
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  const GameSpec game = resolve_game(config);
  const std::size_t runs = config.num_runs;
  std::vector<std::vector<ResultRow>> per_run(runs);
  std::vector<RunRecord> records(runs);

  std::size_t workers = config.threads ? config.threads : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, runs);
  if (workers <= 1) {
    for (std::size_t r = 0; r < runs; ++r) records[r] = run_match(config, game, r, per_run[r]);
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t r = w; r < runs; r += workers) records[r] = run_match(config, game, r, per_run[r]);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }

  ExperimentResult result;
  for (auto& rows : per_run) {
    result.rows.insert(result.rows.end(), std::make_move_iterator(rows.begin()), std::make_move_iterator(rows.end()));
    rows.clear();
    rows.shrink_to_fit();
  }
  result.runs = std::move(records);
  if (!config.output.empty()) write_csv_file(config.output, result.rows);
  return result;
}

void write_csv(std::ostream& os, const std::vector<ResultRow>& rows) {
  os << kCsvHeader << '\n';
  std::string line;
  for (const auto& r : rows) {
    line.clear();
    line += std::to_string(r.run);
    line += ',';
    line += std::to_string(r.stage);
    line += ',';
    line += std::to_string(r.seat);
    line += ',';
    line += r.algo;
    line += ',';
    line += format_double(r.stage_return);
    line += ',';
    line += format_double(r.cum_avg);
    line += '\n';
    os << line;
  }
}

void write_csv_file(const std::string& path, const std::vector<ResultRow>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  write_csv(out, rows);
  if (!out) throw std::runtime_error("error while writing '" + path + "'");
}

std::vector<ResultRow> read_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || trim(line) != kCsvHeader) throw std::runtime_error("missing CSV header");
  std::vector<ResultRow> rows;
  std::size_t line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
    if (cells.size() != 6) throw std::runtime_error("CSV line " + std::to_string(line_no) + ": expected 6 fields");
    ResultRow r;
    try {
      r.run = std::stoul(cells[0]);
      r.stage = std::stoul(cells[1]);
      r.seat = std::stoul(cells[2]);
      r.algo = cells[3];
      r.stage_return = std::stod(cells[4]);
      r.cum_avg = std::stod(cells[5]);
    } catch (const std::exception&) {
      throw std::runtime_error("CSV line " + std::to_string(line_no) + ": bad number");
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

Summary summarize(const std::vector<ResultRow>& rows, std::size_t window, double late_fraction) {
  if (rows.empty()) throw std::invalid_argument("summarize: no rows");
  require(window >= 1, "summary window must be at least 1");
  std::size_t seats = 0, stages = 0, runs = 0;
  for (const auto& r : rows) {
    seats = std::max(seats, r.seat + 1);
    stages = std::max(stages, r.stage + 1);
    runs = std::max(runs, r.run + 1);
  }
  // values[seat][stage][run]
  std::vector<std::vector<std::vector<double>>> values(seats, std::vector<std::vector<double>>(stages));
  std::vector<std::string> algo(seats);
  for (const auto& r : rows) {
    values[r.seat][r.stage].push_back(r.stage_return);
    algo[r.seat] = r.algo;
  }

  Summary out;
  const auto late = static_cast<std::size_t>(std::ceil(late_fraction * static_cast<double>(stages)));
  out.late_window_start = stages - std::min(stages, std::max<std::size_t>(late, 1));
  for (std::size_t i = 0; i < seats; ++i) {
    SeatSummary s;
    s.seat = i;
    s.algo = algo[i];
    std::vector<CurvePoint> raw;
    for (std::size_t t = 0; t < stages; ++t) {
      const auto& v = values[i][t];
      CurvePoint p{t, 0.0, 0.0};
      if (!v.empty()) {
        for (double x : v) p.mean += x;
        p.mean /= static_cast<double>(v.size());
        if (v.size() > 1) {
          double ss = 0.0;
          for (double x : v) ss += (x - p.mean) * (x - p.mean);
          p.stderr_ = std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
        }
      }
      raw.push_back(p);
    }
    if (window <= 1) {
      s.curve = raw;
    } else {
      double m = 0.0, e = 0.0;
      for (std::size_t t = 0; t < stages; ++t) {
        m += raw[t].mean;
        e += raw[t].stderr_;
        if (t >= window) {
          m -= raw[t - window].mean;
          e -= raw[t - window].stderr_;
        }
        const double k = static_cast<double>(std::min(window, t + 1));
        s.curve.push_back({t, m / k, e / k});
      }
    }

    // per-run late-window averages
    std::vector<double> per_run(runs, 0.0);
    std::vector<std::size_t> counts(runs, 0);
    for (const auto& r : rows)
      if (r.seat == i && r.stage >= out.late_window_start) {
        per_run[r.run] += r.stage_return;
        ++counts[r.run];
      }
    std::vector<double> avgs;
    for (std::size_t r = 0; r < runs; ++r)
      if (counts[r]) avgs.push_back(per_run[r] / static_cast<double>(counts[r]));
    s.runs = avgs.size();
    for (double a : avgs) s.late_mean += a;
    if (!avgs.empty()) s.late_mean /= static_cast<double>(avgs.size());
    if (avgs.size() > 1) {
      double ss = 0.0;
      for (double a : avgs) ss += (a - s.late_mean) * (a - s.late_mean);
      s.late_stderr = std::sqrt(ss / static_cast<double>(avgs.size() - 1) / static_cast<double>(avgs.size()));
    }
    out.seats.push_back(std::move(s));
  }
  return out;
}

std::string format_summary(const Summary& summary) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(4);
  for (const auto& s : summary.seats) {
    os << "seat " << s.seat << " (" << s.algo << "): late-window mean " << s.late_mean << " +/- " << s.late_stderr
       << " over " << s.runs << " runs";
    if (!s.curve.empty()) os << ", final smoothed " << s.curve.back().mean;
    os << '\n';
  }
  os << "late window starts at stage " << summary.late_window_start << '\n';
  if (summary.minimax_line) os << "minimax reference " << *summary.minimax_line << '\n';
  return os.str();
}

bool cumulative_averages_consistent(const std::vector<ResultRow>& rows, double tol) {
  std::map<std::pair<std::size_t, std::size_t>, std::pair<double, std::size_t>> acc;
  for (const auto& r : rows) {
    auto& [sum, count] = acc[{r.run, r.seat}];
    sum += r.stage_return;
    ++count;
    if (std::abs(sum / static_cast<double>(count) - r.cum_avg) > tol * std::max(1.0, std::abs(r.cum_avg)))
      return false;
  }
  return true;
}

}  // namespace fcl
