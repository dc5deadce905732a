#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace fcl {

using StateId = std::size_t;
using ActionId = std::size_t;
using JointIndex = std::size_t;
using JointAction = std::vector<ActionId>;
using Rng = std::mt19937_64;

/// Raised when a caller breaks an operation's precondition.
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Raised when a named game, agent or entity is unknown.
class LookupError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

inline void require(bool condition, std::string_view what) {
  if (!condition) throw ContractViolation(std::string(what));
}

// ---------------------------------------------------------------------------
// Player permutations
// ---------------------------------------------------------------------------

class PlayerPermutation {
 public:
  explicit PlayerPermutation(std::vector<std::size_t> mapping);

  static PlayerPermutation identity(std::size_t n);

  std::size_t size() const { return map_.size(); }
  std::size_t operator()(std::size_t i) const { return map_.at(i); }
  const std::vector<std::size_t>& mapping() const { return map_; }

  /// (this ∘ other)(i) = this(other(i)).
  PlayerPermutation compose(const PlayerPermutation& other) const;
  PlayerPermutation inverse() const;
  /// k-fold composition; negative k uses the inverse.
  PlayerPermutation power(long k) const;

  bool is_identity() const;
  /// True when every pair (i, j) is connected by some power.
  bool is_cyclic() const;

  friend bool operator==(const PlayerPermutation&, const PlayerPermutation&) = default;

 private:
  std::vector<std::size_t> map_;
};

/// The rotation i -> (i + 1) mod n.
PlayerPermutation cyclic_permutation(std::size_t n);

/// All n! permutations in lexicographic order.
std::vector<PlayerPermutation> all_permutations(std::size_t n);

// ---------------------------------------------------------------------------
// Joint action indexing (player 0 is the most significant digit)
// ---------------------------------------------------------------------------

class JointLayout {
 public:
  JointLayout() = default;
  explicit JointLayout(std::vector<std::size_t> actions_per_player);

  std::size_t num_players() const { return sizes_.size(); }
  std::size_t num_actions(std::size_t player) const { return sizes_.at(player); }
  std::size_t num_joint() const { return num_joint_; }
  /// Number of joint actions of all players except `player`.
  std::size_t num_others(std::size_t player) const { return num_joint_ / sizes_.at(player); }

  JointIndex encode(std::span<const ActionId> actions) const;
  JointAction decode(JointIndex joint) const;
  ActionId action_of(JointIndex joint, std::size_t player) const {
    return (joint / strides_[player]) % sizes_[player];
  }
  /// Index of the others' joint action, in seat order with `player` removed.
  JointIndex others_index(JointIndex joint, std::size_t player) const {
    return others_of_[player][joint];
  }
  /// Inverse of (action_of, others_index).
  JointIndex combine(std::size_t player, ActionId own, JointIndex others) const {
    return combine_[player][own * num_others(player) + others];
  }

 private:
  std::vector<std::size_t> sizes_;
  std::vector<std::size_t> strides_;
  std::size_t num_joint_ = 0;
  std::vector<std::vector<JointIndex>> others_of_;
  std::vector<std::vector<JointIndex>> combine_;
};

// ---------------------------------------------------------------------------
// Game description
// ---------------------------------------------------------------------------

struct Outcome {
  StateId next = 0;
  double probability = 0.0;
};

/// A relabeling of players, states and actions under which the game is
/// invariant. Seat i's action a becomes seat players(i)'s action
/// action_map[i][a]; state s becomes state_map[s].
struct Automorphism {
  PlayerPermutation players{std::vector<std::size_t>{0}};
  std::vector<StateId> state_map;
  std::vector<StateId> inverse_state_map;
  std::vector<std::vector<ActionId>> action_map;

  JointIndex map_joint(const JointLayout& layout, JointIndex joint) const;
};

/// Plain data from which a GameSpec is built and validated.
struct GameDefinition {
  std::string name;
  std::vector<std::vector<std::string>> action_labels;  // per player
  std::size_t num_states = 0;
  std::vector<std::string> state_labels;                 // optional
  /// Indexed by state * num_joint + joint.
  std::vector<std::vector<Outcome>> transitions;
  /// Step rewards, indexed by (state * num_joint + joint) * N + player.
  std::vector<double> rewards;
  /// Payoff delivered on entering a state, indexed by state * N + player.
  /// Empty means all zero.
  std::vector<double> arrival;
  std::vector<bool> absorbing;
  std::vector<double> initial;
  std::size_t max_stage_steps = 1;
  /// Registered symmetries; permutations without an entry use identity
  /// state and action maps.
  std::vector<Automorphism> automorphisms;
};

class GameSpec {
 public:
  explicit GameSpec(GameDefinition def);

  const std::string& name() const { return def_.name; }
  std::size_t num_players() const { return layout_.num_players(); }
  std::size_t num_states() const { return def_.num_states; }
  std::size_t num_joint() const { return layout_.num_joint(); }
  std::size_t num_actions(std::size_t player) const { return layout_.num_actions(player); }
  const JointLayout& layout() const { return layout_; }
  const std::string& action_label(std::size_t player, ActionId a) const {
    return def_.action_labels.at(player).at(a);
  }
  std::string state_label(StateId s) const;
  std::optional<ActionId> find_action(std::size_t player, std::string_view label) const;

  std::span<const Outcome> outcomes(StateId s, JointIndex joint) const {
    return def_.transitions[s * num_joint() + joint];
  }
  std::span<const double> reward(StateId s, JointIndex joint) const {
    return {def_.rewards.data() + (s * num_joint() + joint) * num_players(), num_players()};
  }
  std::span<const double> arrival(StateId s) const {
    return {arrival_.data() + s * num_players(), num_players()};
  }
  /// r(s, a) plus the expected arrival payoff of the successor.
  std::vector<double> expected_reward(StateId s, JointIndex joint) const;

  bool is_absorbing(StateId s) const { return def_.absorbing[s]; }
  const std::vector<double>& initial_dist() const { return def_.initial; }
  std::size_t max_stage_steps() const { return def_.max_stage_steps; }

  /// Registered automorphism for `psi`, or identity maps when none exists.
  Automorphism automorphism(const PlayerPermutation& psi) const;
  const std::vector<Automorphism>& registered_automorphisms() const { return def_.automorphisms; }

  const GameDefinition& definition() const { return def_; }

 private:
  GameDefinition def_;
  JointLayout layout_;
  std::vector<double> arrival_;
};

Automorphism identity_automorphism(const GameSpec& game, const PlayerPermutation& psi);

// ---------------------------------------------------------------------------
// Stepping and stages
// ---------------------------------------------------------------------------

struct StepResult {
  StateId next = 0;
  std::vector<double> rewards;
  bool absorbing = false;
};

StepResult step(const GameSpec& game, StateId s, std::span<const ActionId> actions, Rng& rng);

StateId sample_initial_state(const GameSpec& game, Rng& rng);

struct Observation {
  StateId state = 0;
  std::size_t seat = 0;
  std::size_t stage = 0;
  std::size_t step_in_stage = 0;
  std::uint64_t clock = 0;  // global environment step counter of the match
};

/// A fully observed transition, as delivered to every agent.
struct Transition {
  StateId state = 0;
  JointIndex joint = 0;
  JointAction actions;
  std::vector<double> rewards;
  StateId next = 0;
  bool absorbing = false;
  bool stage_end = false;  // absorbing or step budget exhausted
  std::size_t stage = 0;
  std::uint64_t clock = 0;
};

class Agent {
 public:
  virtual ~Agent() = default;
  virtual std::string name() const = 0;
  virtual ActionId act(const Observation& obs) = 0;
  virtual void observe(const Transition& tr) = 0;
  /// Reset signal, delivered after the last transition of each stage.
  virtual void end_stage(std::size_t /*stage*/) {}
};

struct TrajectoryStep {
  StateId state = 0;
  JointAction actions;
  std::vector<double> rewards;
  StateId next = 0;
};

struct StageRecord {
  std::vector<TrajectoryStep> trajectory;
  std::vector<double> stage_returns;
  std::size_t stage_index = 0;
};

/// Plays one stage game. `clock` is the match's global step counter and is
/// advanced once per environment step.
StageRecord run_stage(const GameSpec& game, std::span<Agent* const> agents, std::size_t stage,
                      Rng& rng, std::uint64_t& clock, double gamma = 1.0);

// ---------------------------------------------------------------------------
// Exact policy evaluation and symmetry
// ---------------------------------------------------------------------------

using JointDistribution = std::vector<std::pair<JointIndex, double>>;

/// Joint policy as a function of (steps remaining, state).
using JointPolicy = std::function<void(std::size_t steps_left, StateId s, JointDistribution& out)>;

/// Expected per-player stage returns over `horizon` steps from μ0.
std::vector<double> evaluate_returns(const GameSpec& game, const JointPolicy& policy,
                                     std::size_t horizon, double gamma = 1.0);

/// profile[player][state][action]
using StationaryProfile = std::vector<std::vector<std::vector<double>>>;

JointPolicy product_policy(const GameSpec& game, const StationaryProfile& profile);
StationaryProfile random_profile(const GameSpec& game, Rng& rng);

/// Pushes a profile forward through an automorphism: the returned profile
/// lets seat psi(i) play, in its own frame, what seat i played.
StationaryProfile permute_profile(const GameSpec& game, const Automorphism& sym,
                                  const StationaryProfile& profile);

struct SymmetryReport {
  bool passed = false;
  double max_deviation = 0.0;
};

SymmetryReport check_symmetry(const GameSpec& game, const PlayerPermutation& psi,
                              const StationaryProfile& profile, long horizon);

}  // namespace fcl
