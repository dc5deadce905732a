#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fcl/game.hpp"
#include "fcl/matrix_solver.hpp"
#include "fcl/qtable.hpp"

namespace fcl {

class CapacityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Largest state x joint-action table the oracle accepts.
inline constexpr std::size_t kOracleCapacity = 100000;

/// Time-dependent joint policy: joint[h][s] is played with h steps remaining.
struct JointSchedule {
  std::vector<std::vector<JointIndex>> joint;  // index 0 unused (no steps left)

  JointIndex at(std::size_t steps_left, StateId s) const { return joint[steps_left][s]; }
  JointPolicy as_policy() const;
};

struct CooperativeSolution {
  QTable q;                      // Q^c with the full stage horizon remaining
  JointSchedule greedy;          // sum-maximizing schedule, lowest index on ties
  double total = 0.0;            // expected summed return from the initial distribution
  std::vector<double> returns;   // each player's own return under `greedy`
};

struct MinimaxSolution {
  QTable q;                                        // Q^r_j with the full horizon remaining
  std::vector<std::vector<double>> value;          // value[h][s]
  std::vector<std::vector<MixedStrategy>> team;    // team[h][s], over the others' joint actions
  double initial_value = 0.0;
};

/// The schedule the team plays at stage t: player i takes the role of
/// sigma^t(i) in `base`.
JointSchedule rotate_schedule(const GameSpec& game, const JointSchedule& base, std::size_t t);

CooperativeSolution exact_cooperative_values(const GameSpec& game, double gamma = 1.0);
MinimaxSolution exact_minimax_values(const GameSpec& game, std::size_t j, double gamma = 1.0);
/// j best-responds while the others follow `schedule`.
double exact_defect_value(const GameSpec& game, const JointSchedule& schedule, std::size_t j,
                          double gamma = 1.0);

/// Retaliation count before the bonus; nullopt when it is unbounded.
std::optional<long> retaliation_count_exact(double vd, double vc, double vr);

struct PlayerValues {
  double v_coop = 0.0;         // own return under the unrotated sum-maximizing profile
  double v_egalitarian = 0.0;  // average over one N-cycle of rotations
  double v_retaliate = 0.0;
  double v_defect = 0.0;       // maximum over cycle positions
  std::vector<double> v_defect_by_position;
  std::optional<long> k_retaliations;  // nullopt: unbounded
  bool coop_equals_retaliate = false;
};

struct ExactValues {
  std::string game;
  JointAction initial_coop;  // cooperative joint action at the first initial state
  double coop_total = 0.0;
  std::vector<PlayerValues> players;
};

ExactValues compute_exact_values(const GameSpec& game, double gamma = 1.0);

struct EgalitarianReport {
  bool equal_averages = false;
  bool no_better_profile = false;
  std::vector<double> averages;
  double best_profile_minimum = 0.0;  // best min-player return among profiles tried
  std::size_t profiles_checked = 0;
  bool exhaustive = false;
  bool passed() const { return equal_averages && no_better_profile; }
};

/// Checks that the rotated sum-maximizing profile equalizes players and that no
/// pure stationary profile gives every player more. Single-state games are
/// enumerated; larger games are spot-checked with `samples` random profiles.
EgalitarianReport egalitarian_check(const GameSpec& game, std::size_t samples = 500,
                                    std::uint64_t seed = 1);

struct FolkRow {
  double v_coop = 0.0;
  double v_defect = 0.0;
  double v_retaliate = 0.0;
  std::optional<long> k;
  double margin = 0.0;  // V^c - (V^d + K V^r) / (K + 1)
  bool unbounded = false;
  bool holds = false;
};

struct FolkReport {
  std::vector<FolkRow> players;
  bool passed() const;
};

FolkReport folk_inequality_check(const ExactValues& values);

std::string format_report(const ExactValues& values);

}  // namespace fcl
