#include "fcl/fcl_agent.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace fcl {

RetaliationCount retaliation_count(double vd, double vc, double vr, int bonus) {
  if (vc < vr - 1e-9) throw ContractViolation("cooperative value below the minimax value");
  if (vc - vr <= 1e-6) return {true, 0};
  const double ratio = (vd - vc) / (vc - vr);
  const long k = std::max(0L, static_cast<long>(std::ceil(ratio - 1e-9)));
  return {false, k + bonus};
}

EgalitarianSchedule::EgalitarianSchedule(const GameSpec& game) : layout_(&game.layout()) {
  const std::size_t n = game.num_players();
  const auto sigma = cyclic_permutation(n);
  for (std::size_t t = 0; t < n; ++t) rotations_.push_back(game.automorphism(sigma.power(-static_cast<long>(t))));
}

JointIndex EgalitarianSchedule::joint(const QTable& qc, StateId s, std::size_t t) const {
  return joint(s, t, [&qc](StateId p) { return greedy_joint_argmax(qc, p); });
}

std::vector<DefectionEvent> detect_defection(const JointAction& expected, const JointAction& played,
                                             bool exploring, std::size_t self, std::size_t stage,
                                             StateId state) {
  require(expected.size() == played.size(), "joint actions differ in length");
  std::vector<DefectionEvent> out;
  if (exploring) return out;
  for (std::size_t j = 0; j < expected.size(); ++j)
    if (j != self && expected[j] != played[j]) out.push_back({j, stage, state, expected[j], played[j]});
  return out;
}

MixedStrategy retaliation_profile(const QTable& qr, const JointLayout& layout, std::size_t j, StateId s) {
  const auto m = MatrixView::from_joint_row(layout, qr.row(s), j);
  const auto mixed = solve_maxmin(m);
  // A pure team joint reaching the minmax value is preferred; among those, the
  // one that leaves j the least summed over its own actions.
  std::optional<std::size_t> pick;
  double pick_sum = 0.0;
  for (std::size_t c = 0; c < m.cols(); ++c) {
    double top = -std::numeric_limits<double>::infinity();
    double sum = 0.0;
    for (std::size_t r = 0; r < m.rows(); ++r) {
      top = std::max(top, m(r, c));
      sum += m(r, c);
    }
    if (top > mixed.value + kRetaliationTieTol) continue;
    if (!pick || sum < pick_sum - kRetaliationTieTol) {
      pick = c;
      pick_sum = sum;
    }
  }
  if (!pick) return mixed.col_strategy;
  MixedStrategy pure(m.cols(), 0.0);
  pure[*pick] = 1.0;
  return pure;
}

FCLState::FCLState(const GameSpec& game, std::size_t player, FclParams params)
    : game_(&game),
      player_(player),
      params_(params),
      qc_(game.num_states(), game.num_joint(), {QRole::Kind::kCooperative, 0}),
      rate_(params.learning.rate_key, game.num_states(), game.num_joint()),
      explorer_(params.epsilon, params.decay, params.seed),
      schedule_(game) {
  require(player < game.num_players(), "seat out of range");
  const std::size_t n = game.num_players();
  qr_.resize(n);
  qd_.resize(n);
  qr_cache_.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    if (j == player) continue;
    qr_[j] = QTable(game.num_states(), game.num_joint(), {QRole::Kind::kRetaliation, j});
    qd_[j] = QTable(game.num_states(), game.num_joint(), {QRole::Kind::kDefection, j});
    qr_cache_[j] = MaxminCache(game.num_states());
  }
}

const QTable& FCLState::qr(std::size_t j) const {
  require(j < qr_.size() && j != player_, "no retaliation table for this seat");
  return qr_[j];
}

const QTable& FCLState::qd(std::size_t j) const {
  require(j < qd_.size() && j != player_, "no defection table for this seat");
  return qd_[j];
}

std::size_t FCLState::num_tables() const { return 1 + 2 * (game_->num_players() - 1); }

std::optional<long> FCLState::retaliation_stages_left() const {
  if (left_.unbounded) return std::nullopt;
  return target_ ? left_.stages : 0;
}

double FCLState::coop_value(StateId s) const {
  const auto row = qc_.row(s);
  return *std::max_element(row.begin(), row.end()) / static_cast<double>(game_->num_players());
}

double FCLState::retaliation_value(std::size_t j, StateId s) const {
  return maxmin_value(qr(j), game_->layout(), j, s);
}

double FCLState::defect_value(std::size_t j, StateId s) const {
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < schedule_.period(); ++k)
    best = std::max(best, ::fcl::defect_value(qd(j), game_->layout(), j, s, schedule_.joint(qc_, s, k)));
  return best;
}

JointIndex FCLState::cooperative_joint(StateId s, std::size_t stage) const {
  return schedule_.joint(qc_, s, stage);
}

JointIndex FCLState::expected_joint(StateId s, std::uint64_t t, std::size_t stage) const {
  const JointIndex coop = cooperative_joint(s, stage);
  if (!target_) return coop;
  const std::size_t j = *target_;
  const auto& layout = game_->layout();
  const MixedStrategy team = retaliation_profile(qr_[j], layout, j, s);
  const std::size_t others = explorer_.stream().sample(t, kRetaliationChannel, team);
  return layout.combine(j, layout.action_of(coop, j), others);
}

ActionId FCLState::act(StateId s, std::uint64_t t, std::size_t stage) {
  exploring_ = explorer_.explore_now(t);
  expected_ = expected_joint(s, t, stage);
  pending_ = true;
  pending_clock_ = t;
  if (!target_ && exploring_)
    return explorer_.stream().uniform_index(t, ExplorationProcess::kActionChannel + player_,
                                            game_->num_actions(player_));
  return game_->layout().action_of(expected_, player_);
}

void FCLState::observe(const Transition& tr) {
  const auto& layout = game_->layout();
  const double gamma = params_.learning.gamma;
  const double alpha = rate_.next(tr.state, tr.joint);
  const QSample x{tr.state, tr.joint, tr.rewards, tr.next, tr.stage_end};
  q_update_cooperative(qc_, x, alpha, gamma);
  for (std::size_t j = 0; j < game_->num_players(); ++j) {
    if (j == player_) continue;
    q_update_retaliation(qr_[j], layout, j, x, alpha, gamma, &qr_cache_[j]);
    q_update_defection(qd_[j], qc_, layout, j, x, alpha, gamma);
  }

  if (pending_ && pending_clock_ == tr.clock) {
    const auto found =
        detect_defection(layout.decode(expected_), tr.actions, exploring_, player_, tr.stage, tr.state);
    if (!found.empty()) start_retaliation(found.front());
  }
  pending_ = false;
}

StateId FCLState::stage_start_state() const {
  const auto& mu = game_->initial_dist();
  return static_cast<StateId>(std::max_element(mu.begin(), mu.end()) - mu.begin());
}

RetaliationCount FCLState::current_count(std::size_t j) const {
  const StateId s0 = stage_start_state();
  const double vc = coop_value(s0);
  const double vr = retaliation_value(j, s0);
  // Estimates can cross while still learning; that is treated like V^c = V^r.
  if (vc - vr <= 1e-6) return {true, 0};
  return retaliation_count(defect_value(j, s0), vc, vr, params_.learning.retaliation_bonus);
}

void FCLState::start_retaliation(const DefectionEvent& ev) {
  target_ = ev.defector;
  left_ = current_count(ev.defector);
  skip_decrement_ = true;
  events_.push_back(ev);
}

void FCLState::end_stage(std::size_t /*stage*/) {
  if (!target_) return;
  if (skip_decrement_) {
    skip_decrement_ = false;
    return;
  }
  if (left_.unbounded) {
    left_ = current_count(*target_);
    if (left_.unbounded) return;
  }
  if (--left_.stages <= 0) {
    target_.reset();
    left_ = {};
  }
}

ActionId fcl_act(FCLState& fcl, StateId s, std::uint64_t t, std::size_t stage) { return fcl.act(s, t, stage); }

void fcl_observe(FCLState& fcl, const Transition& tr) {
  fcl.observe(tr);
  if (tr.stage_end) fcl.end_stage(tr.stage);
}

}  // namespace fcl
