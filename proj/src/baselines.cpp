#include "fcl/baselines.hpp"

#include <algorithm>
#include <cmath>

#include "fcl/matrix_solver.hpp"

namespace fcl {

SelfishQAgent::SelfishQAgent(const GameSpec& game, std::size_t seat, SelfishParams params)
    : game_(&game),
      seat_(seat),
      params_(params),
      q_(game.num_states(), game.num_actions(seat), {QRole::Kind::kSelfish, seat}),
      rate_(params.learning.rate_key, game.num_states(), game.num_actions(seat)),
      explorer_(params.epsilon, params.decay, params.seed) {
  require(seat < game.num_players(), "seat out of range");
}

ActionId SelfishQAgent::act(const Observation& obs) {
  if (explorer_.explore_now(obs.clock))
    return explorer_.stream().uniform_index(obs.clock, ExplorationProcess::kActionChannel + seat_,
                                            game_->num_actions(seat_));
  return argmax_index(q_.row(obs.state));
}

void SelfishQAgent::observe(const Transition& tr) {
  const ActionId own = tr.actions[seat_];
  const double alpha = rate_.next(tr.state, own);
  q_update_selfish(q_, tr.state, own, tr.rewards[seat_], tr.next, tr.stage_end, alpha,
                   params_.learning.gamma);
}

std::vector<double> SoftmaxPolicy::probabilities(StateId s) const {
  const double* z = logits.data() + s * num_actions;
  const double top = *std::max_element(z, z + num_actions);
  std::vector<double> p(num_actions);
  double total = 0.0;
  for (std::size_t a = 0; a < num_actions; ++a) total += p[a] = std::exp(z[a] - top);
  for (double& x : p) x /= total;
  return p;
}

namespace {

std::vector<double> returns_to_go(const std::vector<EpisodeStep>& episode, double gamma) {
  std::vector<double> g(episode.size());
  double acc = 0.0;
  for (std::size_t k = episode.size(); k-- > 0;) g[k] = acc = episode[k].reward + gamma * acc;
  return g;
}

}  // namespace

double reinforce_objective(const SoftmaxPolicy& policy, const std::vector<EpisodeStep>& episode, double gamma) {
  const auto g = returns_to_go(episode, gamma);
  double total = 0.0;
  for (std::size_t k = 0; k < episode.size(); ++k)
    total += g[k] * std::log(policy.probabilities(episode[k].state)[episode[k].action]);
  return total;
}

std::vector<double> reinforce_gradient(const SoftmaxPolicy& policy, const std::vector<EpisodeStep>& episode,
                                       double gamma) {
  const auto g = returns_to_go(episode, gamma);
  std::vector<double> grad(policy.logits.size(), 0.0);
  for (std::size_t k = 0; k < episode.size(); ++k) {
    const auto& e = episode[k];
    const auto p = policy.probabilities(e.state);
    double* out = grad.data() + e.state * policy.num_actions;
    for (std::size_t a = 0; a < policy.num_actions; ++a)
      out[a] += g[k] * ((a == e.action ? 1.0 : 0.0) - p[a]);
  }
  return grad;
}

void Adam::ascend(std::vector<double>& theta, const std::vector<double>& grad) {
  require(theta.size() == m_.size() && grad.size() == m_.size(), "adam size mismatch");
  ++t_;
  const double c1 = 1.0 - std::pow(params_.beta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(params_.beta2, static_cast<double>(t_));
  for (std::size_t k = 0; k < theta.size(); ++k) {
    m_[k] = params_.beta1 * m_[k] + (1.0 - params_.beta1) * grad[k];
    v_[k] = params_.beta2 * v_[k] + (1.0 - params_.beta2) * grad[k] * grad[k];
    theta[k] += params_.learning_rate * (m_[k] / c1) / (std::sqrt(v_[k] / c2) + params_.epsilon);
  }
}

void pg_update(SoftmaxPolicy& policy, Adam& adam, const std::vector<EpisodeStep>& episode, double gamma) {
  if (episode.empty()) return;
  adam.ascend(policy.logits, reinforce_gradient(policy, episode, gamma));
}

PGAgent::PGAgent(const GameSpec& game, std::size_t seat, std::uint64_t seed, double gamma, AdamParams adam)
    : seat_(seat), gamma_(gamma), rng_(seed) {
  require(seat < game.num_players(), "seat out of range");
  policy_.num_states = game.num_states();
  policy_.num_actions = game.num_actions(seat);
  policy_.logits.assign(policy_.num_states * policy_.num_actions, 0.0);
  adam_ = Adam(policy_.logits.size(), adam);
}

ActionId PGAgent::act(const Observation& obs) {
  const auto p = policy_.probabilities(obs.state);
  std::discrete_distribution<std::size_t> pick(p.begin(), p.end());
  return pick(rng_);
}

void PGAgent::observe(const Transition& tr) {
  episode_.push_back({tr.state, tr.actions[seat_], tr.rewards[seat_]});
}

void PGAgent::end_stage(std::size_t) {
  pg_update(policy_, adam_, episode_, gamma_);
  episode_.clear();
}

ActionId RandomAgent::act(const Observation&) {
  std::uniform_int_distribution<std::size_t> pick(0, actions_ - 1);
  return pick(rng_);
}

}  // namespace fcl
