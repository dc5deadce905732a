#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "fcl/game.hpp"
#include "fcl/learning.hpp"
#include "fcl/matrix_solver.hpp"
#include "fcl/qtable.hpp"

namespace fcl {

/// Retaliation length in stages. `unbounded` when V^c and V^r coincide.
struct RetaliationCount {
  bool unbounded = false;
  long stages = 0;
  friend bool operator==(const RetaliationCount&, const RetaliationCount&) = default;
};

/// max(0, ceil((vd - vc) / (vc - vr))) + bonus, unbounded when vc - vr <= 1e-6.
RetaliationCount retaliation_count(double vd, double vc, double vr, int bonus);

/// Cycles a cooperative profile through the rotations sigma^t.
class EgalitarianSchedule {
 public:
  explicit EgalitarianSchedule(const GameSpec& game);

  /// Joint action at stage t in state s, given the unrotated cooperative
  /// joint action at each state. Player i plays the sigma^t(i) part.
  template <typename CoopAt>
  JointIndex joint(StateId s, std::size_t t, CoopAt&& coop_at) const {
    const Automorphism& sym = rotations_[t % rotations_.size()];
    return sym.map_joint(*layout_, coop_at(sym.inverse_state_map[s]));
  }
  /// Shortcut with coop = argmax Q^c.
  JointIndex joint(const QTable& qc, StateId s, std::size_t t) const;

  std::size_t period() const { return rotations_.size(); }

 private:
  const JointLayout* layout_;
  std::vector<Automorphism> rotations_;
};

/// Seat of the expected joint action that differs from the played one.
struct DefectionEvent {
  std::size_t defector = 0;
  std::size_t stage = 0;
  StateId state = 0;
  ActionId expected = 0;
  ActionId played = 0;
};

/// Deviations of every seat other than `self`. Nothing is flagged while exploring.
std::vector<DefectionEvent> detect_defection(const JointAction& expected, const JointAction& played,
                                             bool exploring, std::size_t self, std::size_t stage = 0,
                                             StateId state = 0);

inline constexpr double kRetaliationTieTol = 1e-9;

/// Team strategy punishing j at s in j's matrix game on Q^r_j. A pure joint of
/// the others is used when one reaches the minmax value (least total for j on
/// ties, then lowest index); otherwise the minimizing mixed strategy.
MixedStrategy retaliation_profile(const QTable& qr, const JointLayout& layout, std::size_t j, StateId s);

struct FclParams {
  double epsilon = 0.5;
  double decay = 0.9;
  std::uint64_t seed = 0;  // shared by the whole team
  LearningParams learning;
};

/// One FCL player's learner state.
class FCLState {
 public:
  FCLState(const GameSpec& game, std::size_t player, FclParams params);

  std::size_t player() const { return player_; }
  const GameSpec& game() const { return *game_; }
  const FclParams& params() const { return params_; }

  const QTable& qc() const { return qc_; }
  const QTable& qr(std::size_t j) const;
  const QTable& qd(std::size_t j) const;
  std::size_t num_tables() const;

  std::optional<std::size_t> retaliation_target() const { return target_; }
  /// Remaining stages, or nullopt while unbounded. Only meaningful with a target.
  std::optional<long> retaliation_stages_left() const;
  const std::vector<DefectionEvent>& events() const { return events_; }

  /// Value estimates used for the retaliation count.
  double coop_value(StateId s) const;
  double retaliation_value(std::size_t j, StateId s) const;
  double defect_value(std::size_t j, StateId s) const;

  /// Joint action the team expects at (s, stage) given the current tables.
  JointIndex cooperative_joint(StateId s, std::size_t stage) const;

  ActionId act(StateId s, std::uint64_t t, std::size_t stage);
  void observe(const Transition& tr);
  void end_stage(std::size_t stage);

 private:
  JointIndex expected_joint(StateId s, std::uint64_t t, std::size_t stage) const;
  void start_retaliation(const DefectionEvent& ev);
  RetaliationCount current_count(std::size_t j) const;
  StateId stage_start_state() const;

  const GameSpec* game_;
  std::size_t player_;
  FclParams params_;
  QTable qc_;
  std::vector<QTable> qr_;
  std::vector<QTable> qd_;
  std::vector<MaxminCache> qr_cache_;
  RateSchedule rate_;
  ExplorationProcess explorer_;
  EgalitarianSchedule schedule_;

  std::optional<std::size_t> target_;
  RetaliationCount left_;
  bool skip_decrement_ = false;
  std::vector<DefectionEvent> events_;

  // bookkeeping for the step in flight
  std::uint64_t pending_clock_ = 0;
  bool pending_ = false;
  bool exploring_ = false;
  JointIndex expected_ = 0;
};

ActionId fcl_act(FCLState& fcl, StateId s, std::uint64_t t, std::size_t stage);
void fcl_observe(FCLState& fcl, const Transition& tr);

class FCLAgent : public Agent {
 public:
  FCLAgent(const GameSpec& game, std::size_t seat, FclParams params) : state_(game, seat, params) {}

  std::string name() const override { return "fcl"; }
  ActionId act(const Observation& obs) override { return state_.act(obs.state, obs.clock, obs.stage); }
  void observe(const Transition& tr) override { state_.observe(tr); }
  void end_stage(std::size_t stage) override { state_.end_stage(stage); }

  const FCLState& state() const { return state_; }

 private:
  FCLState state_;
};

inline constexpr std::uint64_t kRetaliationChannel = 1 << 20;

}  // namespace fcl
