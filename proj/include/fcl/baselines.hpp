#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "fcl/game.hpp"
#include "fcl/learning.hpp"
#include "fcl/qtable.hpp"

namespace fcl {

struct SelfishParams {
  double epsilon = 0.5;
  double decay = 0.9;
  std::uint64_t seed = 1;
  LearningParams learning;
};

/// Independent Q-learner on (state, own action); opponents are part of the environment.
class SelfishQAgent : public Agent {
 public:
  SelfishQAgent(const GameSpec& game, std::size_t seat, SelfishParams params);

  std::string name() const override { return "qlearning"; }
  ActionId act(const Observation& obs) override;
  void observe(const Transition& tr) override;

  const QTable& table() const { return q_; }

 private:
  const GameSpec* game_;
  std::size_t seat_;
  SelfishParams params_;
  QTable q_;
  RateSchedule rate_;
  ExplorationProcess explorer_;
};

// ---------------------------------------------------------------------------
// Tabular softmax policy gradient
// ---------------------------------------------------------------------------

struct EpisodeStep {
  StateId state = 0;
  ActionId action = 0;
  double reward = 0.0;
};

/// logits[s * num_actions + a]
struct SoftmaxPolicy {
  std::size_t num_states = 0;
  std::size_t num_actions = 0;
  std::vector<double> logits;

  std::vector<double> probabilities(StateId s) const;
};

/// sum_t G_t log pi(a_t | s_t) with G_t the discounted return-to-go.
double reinforce_objective(const SoftmaxPolicy& policy, const std::vector<EpisodeStep>& episode,
                           double gamma);
/// Gradient of reinforce_objective with respect to the logits.
std::vector<double> reinforce_gradient(const SoftmaxPolicy& policy, const std::vector<EpisodeStep>& episode,
                                       double gamma);

struct AdamParams {
  double learning_rate = 0.1;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Adam state for gradient ascent over a flat parameter vector.
class Adam {
 public:
  Adam() = default;
  Adam(std::size_t size, AdamParams params) : params_(params), m_(size, 0.0), v_(size, 0.0) {}

  void ascend(std::vector<double>& theta, const std::vector<double>& grad);
  std::uint64_t steps() const { return t_; }

 private:
  AdamParams params_;
  std::vector<double> m_;
  std::vector<double> v_;
  std::uint64_t t_ = 0;
};

class PGAgent : public Agent {
 public:
  PGAgent(const GameSpec& game, std::size_t seat, std::uint64_t seed, double gamma = 1.0,
          AdamParams adam = {});

  std::string name() const override { return "pg"; }
  ActionId act(const Observation& obs) override;
  void observe(const Transition& tr) override;
  void end_stage(std::size_t stage) override;

  const SoftmaxPolicy& policy() const { return policy_; }

 private:
  std::size_t seat_;
  double gamma_;
  SoftmaxPolicy policy_;
  Adam adam_;
  Rng rng_;
  std::vector<EpisodeStep> episode_;
};

/// Applies one REINFORCE + Adam step for a finished episode.
void pg_update(SoftmaxPolicy& policy, Adam& adam, const std::vector<EpisodeStep>& episode, double gamma);

// ---------------------------------------------------------------------------
// Scripted opponents
// ---------------------------------------------------------------------------

/// Plays the same action everywhere.
class FixedAgent : public Agent {
 public:
  FixedAgent(std::string label, ActionId action) : label_(std::move(label)), action_(action) {}
  std::string name() const override { return label_; }
  ActionId act(const Observation&) override { return action_; }
  void observe(const Transition&) override {}

 private:
  std::string label_;
  ActionId action_;
};

class RandomAgent : public Agent {
 public:
  RandomAgent(const GameSpec& game, std::size_t seat, std::uint64_t seed)
      : actions_(game.num_actions(seat)), rng_(seed) {}
  std::string name() const override { return "random"; }
  ActionId act(const Observation&) override;
  void observe(const Transition&) override {}

 private:
  std::size_t actions_;
  Rng rng_;
};

}  // namespace fcl
