#include "fcl/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

namespace fcl {

namespace {

void check_capacity(const GameSpec& game) {
  if (game.num_states() * game.num_joint() > kOracleCapacity)
    throw CapacityError("game '" + game.name() + "' is too large for exact solution (" +
                        std::to_string(game.num_states() * game.num_joint()) + " state-action pairs)");
}

/// Expected continuation of `value` (indexed by state) after (s, joint), with
/// arrival payoffs of `player` (or their sum when player == npos).
double continuation(const GameSpec& game, StateId s, JointIndex joint, const std::vector<double>& value,
                    std::size_t player, double gamma) {
  double total = 0.0;
  for (const Outcome& o : game.outcomes(s, joint)) {
    const auto arrival = game.arrival(o.next);
    double pay = 0.0;
    if (player == std::string::npos) {
      for (double a : arrival) pay += a;
    } else {
      pay = arrival[player];
    }
    total += o.probability * (pay + gamma * value[o.next]);
  }
  return total;
}

double reward_of(const GameSpec& game, StateId s, JointIndex joint, std::size_t player) {
  const auto r = game.reward(s, joint);
  if (player != std::string::npos) return r[player];
  double total = 0.0;
  for (double x : r) total += x;
  return total;
}

double initial_average(const GameSpec& game, const std::vector<double>& value) {
  double total = 0.0;
  for (StateId s = 0; s < game.num_states(); ++s) total += game.initial_dist()[s] * value[s];
  return total;
}

StateId first_initial_state(const GameSpec& game) {
  for (StateId s = 0; s < game.num_states(); ++s)
    if (game.initial_dist()[s] > 0.0) return s;
  return 0;
}

constexpr double kTieTol = 1e-12;

}  // namespace

JointPolicy JointSchedule::as_policy() const {
  return [this](std::size_t steps_left, StateId s, JointDistribution& out) {
    out.emplace_back(joint[steps_left][s], 1.0);
  };
}

JointSchedule rotate_schedule(const GameSpec& game, const JointSchedule& base, std::size_t t) {
  const auto sigma = cyclic_permutation(game.num_players());
  // Seat psi(k) plays the part of seat k, so seat i plays the part of sigma^t(i).
  const auto psi = sigma.power(-static_cast<long>(t % game.num_players()));
  const Automorphism sym = game.automorphism(psi);
  JointSchedule out;
  out.joint.resize(base.joint.size());
  for (std::size_t h = 0; h < base.joint.size(); ++h) {
    out.joint[h].resize(game.num_states());
    for (StateId s = 0; s < game.num_states(); ++s)
      out.joint[h][s] = sym.map_joint(game.layout(), base.joint[h][sym.inverse_state_map[s]]);
  }
  return out;
}

CooperativeSolution exact_cooperative_values(const GameSpec& game, double gamma) {
  check_capacity(game);
  const std::size_t horizon = game.max_stage_steps();
  const std::size_t states = game.num_states();
  const std::size_t joints = game.num_joint();
  std::vector<double> value(states, 0.0), next(states, 0.0);

  CooperativeSolution sol;
  sol.greedy.joint.assign(horizon + 1, std::vector<JointIndex>(states, 0));
  sol.q = QTable(states, joints, {QRole::Kind::kCooperative, 0});
  for (std::size_t h = 1; h <= horizon; ++h) {
    for (StateId s = 0; s < states; ++s) {
      next[s] = 0.0;
      if (game.is_absorbing(s)) continue;
      double best = -std::numeric_limits<double>::infinity();
      JointIndex arg = 0;
      for (JointIndex j = 0; j < joints; ++j) {
        const double q = reward_of(game, s, j, std::string::npos) +
                         continuation(game, s, j, value, std::string::npos, gamma);
        if (h == horizon) sol.q.at(s, j) = q;
        if (q > best + kTieTol) {
          best = q;
          arg = j;
        }
      }
      next[s] = best;
      sol.greedy.joint[h][s] = arg;
    }
    std::swap(value, next);
  }
  sol.total = initial_average(game, value);
  sol.returns = evaluate_returns(game, sol.greedy.as_policy(), horizon, gamma);
  return sol;
}

MinimaxSolution exact_minimax_values(const GameSpec& game, std::size_t j, double gamma) {
  check_capacity(game);
  require(j < game.num_players(), "player index out of range");
  const std::size_t horizon = game.max_stage_steps();
  const std::size_t states = game.num_states();
  const auto& layout = game.layout();
  const std::size_t rows = layout.num_actions(j);
  const std::size_t cols = layout.num_others(j);

  MinimaxSolution sol;
  sol.q = QTable(states, game.num_joint(), {QRole::Kind::kRetaliation, j});
  sol.value.assign(horizon + 1, std::vector<double>(states, 0.0));
  sol.team.assign(horizon + 1, std::vector<MixedStrategy>(states));
  for (std::size_t h = 1; h <= horizon; ++h) {
    const auto& prev = sol.value[h - 1];
    for (StateId s = 0; s < states; ++s) {
      if (game.is_absorbing(s)) continue;
      MatrixView m(rows, cols);
      for (JointIndex a = 0; a < game.num_joint(); ++a) {
        const double q = reward_of(game, s, a, j) + continuation(game, s, a, prev, j, gamma);
        if (h == horizon) sol.q.at(s, a) = q;
        m(layout.action_of(a, j), layout.others_index(a, j)) = q;
      }
      const auto lp = solve_maxmin(m);
      sol.value[h][s] = lp.value;
      sol.team[h][s] = lp.col_strategy;
    }
  }
  sol.initial_value = initial_average(game, sol.value[horizon]);
  return sol;
}

double exact_defect_value(const GameSpec& game, const JointSchedule& schedule, std::size_t j, double gamma) {
  check_capacity(game);
  const std::size_t horizon = game.max_stage_steps();
  const std::size_t states = game.num_states();
  const auto& layout = game.layout();
  std::vector<double> value(states, 0.0), next(states, 0.0);
  for (std::size_t h = 1; h <= horizon; ++h) {
    for (StateId s = 0; s < states; ++s) {
      next[s] = 0.0;
      if (game.is_absorbing(s)) continue;
      const JointIndex others = layout.others_index(schedule.at(h, s), j);
      double best = -std::numeric_limits<double>::infinity();
      for (ActionId a = 0; a < layout.num_actions(j); ++a) {
        const JointIndex joint = layout.combine(j, a, others);
        best = std::max(best, reward_of(game, s, joint, j) + continuation(game, s, joint, value, j, gamma));
      }
      next[s] = best;
    }
    std::swap(value, next);
  }
  return initial_average(game, value);
}

std::optional<long> retaliation_count_exact(double vd, double vc, double vr) {
  if (vc - vr <= 1e-6) return std::nullopt;
  const double ratio = (vd - vc) / (vc - vr);
  return std::max(0L, static_cast<long>(std::ceil(ratio - 1e-9)));
}

ExactValues compute_exact_values(const GameSpec& game, double gamma) {
  const std::size_t n = game.num_players();
  const auto coop = exact_cooperative_values(game, gamma);

  ExactValues out;
  out.game = game.name();
  out.coop_total = coop.total;
  out.initial_coop = game.layout().decode(coop.greedy.at(game.max_stage_steps(), first_initial_state(game)));
  out.players.resize(n);

  std::vector<JointSchedule> rotations;
  for (std::size_t t = 0; t < n; ++t) rotations.push_back(rotate_schedule(game, coop.greedy, t));
  std::vector<double> egalitarian(n, 0.0);
  for (const auto& r : rotations) {
    const auto returns = evaluate_returns(game, r.as_policy(), game.max_stage_steps(), gamma);
    for (std::size_t p = 0; p < n; ++p) egalitarian[p] += returns[p] / static_cast<double>(n);
  }

  for (std::size_t p = 0; p < n; ++p) {
    PlayerValues& v = out.players[p];
    v.v_coop = coop.returns[p];
    v.v_egalitarian = egalitarian[p];
    v.v_retaliate = exact_minimax_values(game, p, gamma).initial_value;
    v.v_defect = -std::numeric_limits<double>::infinity();
    for (const auto& r : rotations) {
      v.v_defect_by_position.push_back(exact_defect_value(game, r, p, gamma));
      v.v_defect = std::max(v.v_defect, v.v_defect_by_position.back());
    }
    v.k_retaliations = retaliation_count_exact(v.v_defect, v.v_egalitarian, v.v_retaliate);
    v.coop_equals_retaliate = !v.k_retaliations.has_value();
  }
  return out;
}

EgalitarianReport egalitarian_check(const GameSpec& game, std::size_t samples, std::uint64_t seed) {
  const auto values = compute_exact_values(game);
  EgalitarianReport rep;
  for (const auto& p : values.players) rep.averages.push_back(p.v_egalitarian);
  const double level = *std::min_element(rep.averages.begin(), rep.averages.end());
  const double top = *std::max_element(rep.averages.begin(), rep.averages.end());
  rep.equal_averages = top - level <= 1e-9;

  auto min_return = [&](const std::vector<double>& r) { return *std::min_element(r.begin(), r.end()); };
  rep.best_profile_minimum = -std::numeric_limits<double>::infinity();
  const std::size_t horizon = game.max_stage_steps();
  if (game.num_states() == 1) {
    rep.exhaustive = true;
    for (JointIndex j = 0; j < game.num_joint(); ++j) {
      JointSchedule fixed;
      fixed.joint.assign(horizon + 1, std::vector<JointIndex>(game.num_states(), j));
      rep.best_profile_minimum =
          std::max(rep.best_profile_minimum, min_return(evaluate_returns(game, fixed.as_policy(), horizon)));
      ++rep.profiles_checked;
    }
  } else {
    Rng rng(seed);
    const auto greedy = exact_cooperative_values(game).greedy.joint[horizon];
    for (std::size_t k = 0; k < samples; ++k) {
      JointSchedule fixed;
      std::vector<JointIndex> row(game.num_states());
      std::uniform_int_distribution<JointIndex> pick(0, game.num_joint() - 1);
      for (auto& j : row) j = pick(rng);
      // bias half the samples toward the cooperative schedule so the check is not vacuous
      if (k % 2 == 1) {
        std::bernoulli_distribution keep(0.8);
        for (StateId s = 0; s < row.size(); ++s)
          if (keep(rng)) row[s] = greedy[s];
      }
      fixed.joint.assign(horizon + 1, row);
      rep.best_profile_minimum =
          std::max(rep.best_profile_minimum, min_return(evaluate_returns(game, fixed.as_policy(), horizon)));
      ++rep.profiles_checked;
    }
  }
  rep.no_better_profile = rep.best_profile_minimum <= level + 1e-9;
  return rep;
}

bool FolkReport::passed() const {
  return std::all_of(players.begin(), players.end(), [](const FolkRow& r) { return r.holds; });
}

FolkReport folk_inequality_check(const ExactValues& values) {
  FolkReport rep;
  for (const auto& p : values.players) {
    FolkRow row;
    row.v_coop = p.v_egalitarian;
    row.v_defect = p.v_defect;
    row.v_retaliate = p.v_retaliate;
    row.k = p.k_retaliations;
    row.unbounded = !p.k_retaliations.has_value();
    if (row.unbounded) {
      // With V^c = V^r the bound only holds in the limit of endless retaliation.
      row.margin = p.v_egalitarian - p.v_retaliate;
      row.holds = row.margin >= -1e-9;
    } else {
      const double k = static_cast<double>(*p.k_retaliations);
      row.margin = p.v_egalitarian - (p.v_defect + k * p.v_retaliate) / (k + 1.0);
      row.holds = row.margin >= -1e-9;
    }
    rep.players.push_back(row);
  }
  return rep;
}

std::string format_report(const ExactValues& values) {
  std::ostringstream os;
  os << std::setprecision(10);
  os << "game " << values.game << '\n';
  os << "coop_profile";
  for (ActionId a : values.initial_coop) os << ' ' << a;
  os << "\ncoop_total " << values.coop_total << '\n';
  for (std::size_t p = 0; p < values.players.size(); ++p) {
    const auto& v = values.players[p];
    auto clean = [](double x) { return std::abs(x) < 1e-12 ? 0.0 : x; };
    os << "player " << p << " V^c=" << clean(v.v_egalitarian) << " V^r=" << clean(v.v_retaliate)
       << " V^d=" << clean(v.v_defect) << " K=";
    if (v.k_retaliations)
      os << *v.k_retaliations;
    else
      os << "UNBOUNDED";
    os << " own_coop=" << clean(v.v_coop) << " V^d_by_position=";
    for (std::size_t k = 0; k < v.v_defect_by_position.size(); ++k)
      os << (k ? "," : "") << clean(v.v_defect_by_position[k]);
    os << '\n';
  }
  return os.str();
}

}  // namespace fcl
