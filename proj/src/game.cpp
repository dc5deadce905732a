#include "fcl/game.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace fcl {

// ---------------------------------------------------------------------------
// PlayerPermutation
// ---------------------------------------------------------------------------

PlayerPermutation::PlayerPermutation(std::vector<std::size_t> mapping) : map_(std::move(mapping)) {
  require(!map_.empty(), "permutation must act on at least one player");
  std::vector<bool> seen(map_.size(), false);
  for (std::size_t image : map_) {
    require(image < map_.size() && !seen[image], "permutation is not bijective");
    seen[image] = true;
  }
}

PlayerPermutation PlayerPermutation::identity(std::size_t n) {
  std::vector<std::size_t> m(n);
  std::iota(m.begin(), m.end(), std::size_t{0});
  return PlayerPermutation(std::move(m));
}

PlayerPermutation PlayerPermutation::compose(const PlayerPermutation& other) const {
  require(other.size() == size(), "composing permutations of different sizes");
  std::vector<std::size_t> m(size());
  for (std::size_t i = 0; i < size(); ++i) m[i] = map_[other.map_[i]];
  return PlayerPermutation(std::move(m));
}

PlayerPermutation PlayerPermutation::inverse() const {
  std::vector<std::size_t> m(size());
  for (std::size_t i = 0; i < size(); ++i) m[map_[i]] = i;
  return PlayerPermutation(std::move(m));
}

PlayerPermutation PlayerPermutation::power(long k) const {
  const PlayerPermutation base = k < 0 ? inverse() : *this;
  PlayerPermutation result = identity(size());
  for (long n = std::labs(k); n > 0; --n) result = base.compose(result);
  return result;
}

bool PlayerPermutation::is_identity() const {
  for (std::size_t i = 0; i < size(); ++i)
    if (map_[i] != i) return false;
  return true;
}

bool PlayerPermutation::is_cyclic() const {
  // A single orbit through 0 of full length connects every pair.
  std::size_t len = 0;
  std::size_t i = 0;
  do {
    i = map_[i];
    ++len;
  } while (i != 0 && len <= size());
  return len == size();
}

PlayerPermutation cyclic_permutation(std::size_t n) {
  require(n >= 1, "cyclic_permutation needs n >= 1");
  std::vector<std::size_t> m(n);
  for (std::size_t i = 0; i < n; ++i) m[i] = (i + 1) % n;
  return PlayerPermutation(std::move(m));
}

std::vector<PlayerPermutation> all_permutations(std::size_t n) {
  std::vector<std::size_t> m(n);
  std::iota(m.begin(), m.end(), std::size_t{0});
  std::vector<PlayerPermutation> out;
  do {
    out.emplace_back(m);
  } while (std::next_permutation(m.begin(), m.end()));
  return out;
}

// ---------------------------------------------------------------------------
// JointLayout
// ---------------------------------------------------------------------------

JointLayout::JointLayout(std::vector<std::size_t> actions_per_player) : sizes_(std::move(actions_per_player)) {
  require(!sizes_.empty(), "a game needs at least one player");
  for (std::size_t n : sizes_) require(n > 0, "every action set must be non-empty");
  strides_.assign(sizes_.size(), 1);
  for (std::size_t p = sizes_.size() - 1; p > 0; --p) strides_[p - 1] = strides_[p] * sizes_[p];
  num_joint_ = strides_[0] * sizes_[0];

  others_of_.assign(sizes_.size(), std::vector<JointIndex>(num_joint_));
  combine_.assign(sizes_.size(), std::vector<JointIndex>(num_joint_));
  for (std::size_t p = 0; p < sizes_.size(); ++p) {
    const std::size_t others = num_joint_ / sizes_[p];
    for (JointIndex j = 0; j < num_joint_; ++j) {
      JointIndex idx = 0;
      for (std::size_t q = 0; q < sizes_.size(); ++q) {
        if (q == p) continue;
        idx = idx * sizes_[q] + action_of(j, q);
      }
      others_of_[p][j] = idx;
      combine_[p][action_of(j, p) * others + idx] = j;
    }
  }
}

JointIndex JointLayout::encode(std::span<const ActionId> actions) const {
  require(actions.size() == sizes_.size(), "joint action has wrong length");
  JointIndex idx = 0;
  for (std::size_t p = 0; p < sizes_.size(); ++p) {
    require(actions[p] < sizes_[p], "action index out of range");
    idx += actions[p] * strides_[p];
  }
  return idx;
}

JointAction JointLayout::decode(JointIndex joint) const {
  require(joint < num_joint_, "joint action index out of range");
  JointAction a(sizes_.size());
  for (std::size_t p = 0; p < sizes_.size(); ++p) a[p] = action_of(joint, p);
  return a;
}

// ---------------------------------------------------------------------------
// GameSpec
// ---------------------------------------------------------------------------

JointIndex Automorphism::map_joint(const JointLayout& layout, JointIndex joint) const {
  JointAction mapped(layout.num_players());
  for (std::size_t p = 0; p < layout.num_players(); ++p)
    mapped[players(p)] = action_map[p][layout.action_of(joint, p)];
  return layout.encode(mapped);
}

namespace {

constexpr double kNormTol = 1e-9;

void validate_automorphism(const GameDefinition& def, const JointLayout& layout, const Automorphism& sym) {
  require(sym.players.size() == layout.num_players(), "automorphism has wrong player count");
  require(sym.state_map.size() == def.num_states && sym.inverse_state_map.size() == def.num_states,
          "automorphism state map has wrong size");
  for (StateId s = 0; s < def.num_states; ++s) {
    require(sym.state_map[s] < def.num_states, "automorphism state map out of range");
    require(sym.inverse_state_map[sym.state_map[s]] == s, "automorphism state maps are not inverse");
  }
  require(sym.action_map.size() == layout.num_players(), "automorphism action map has wrong size");
  for (std::size_t p = 0; p < layout.num_players(); ++p) {
    require(sym.action_map[p].size() == layout.num_actions(p) &&
                layout.num_actions(sym.players(p)) == layout.num_actions(p),
            "automorphism action map has wrong size");
    for (ActionId a : sym.action_map[p])
      require(a < layout.num_actions(p), "automorphism action map out of range");
  }
}

}  // namespace

GameSpec::GameSpec(GameDefinition def) : def_(std::move(def)) {
  require(def_.action_labels.size() >= 2, "a game needs at least two players");
  std::vector<std::size_t> sizes;
  for (const auto& labels : def_.action_labels) sizes.push_back(labels.size());
  layout_ = JointLayout(sizes);

  const std::size_t n = num_players();
  const std::size_t s_count = def_.num_states;
  const std::size_t j_count = layout_.num_joint();
  require(s_count > 0, "a game needs at least one state");
  require(def_.max_stage_steps >= 1, "max_stage_steps must be >= 1");
  require(def_.transitions.size() == s_count * j_count, "transition table has wrong size");
  require(def_.rewards.size() == s_count * j_count * n, "reward table has wrong size");
  require(def_.absorbing.size() == s_count, "absorbing flags have wrong size");
  require(def_.initial.size() == s_count, "initial distribution has wrong size");
  if (!def_.state_labels.empty())
    require(def_.state_labels.size() == s_count, "state labels have wrong size");

  arrival_ = def_.arrival.empty() ? std::vector<double>(s_count * n, 0.0) : def_.arrival;
  require(arrival_.size() == s_count * n, "arrival table has wrong size");

  for (double r : def_.rewards) require(std::isfinite(r), "rewards must be finite");
  for (double r : arrival_) require(std::isfinite(r), "arrival payoffs must be finite");

  for (std::size_t k = 0; k < def_.transitions.size(); ++k) {
    const StateId s = k / j_count;
    if (def_.absorbing[s]) continue;
    double total = 0.0;
    for (const Outcome& o : def_.transitions[k]) {
      require(o.next < s_count, "transition target out of range");
      require(o.probability >= 0.0, "negative transition probability");
      total += o.probability;
    }
    require(std::abs(total - 1.0) < kNormTol, "transition row does not sum to 1");
  }
  double mass = 0.0;
  for (double p : def_.initial) {
    require(p >= 0.0, "negative initial probability");
    mass += p;
  }
  require(std::abs(mass - 1.0) < kNormTol, "initial distribution does not sum to 1");
  for (const Automorphism& sym : def_.automorphisms) validate_automorphism(def_, layout_, sym);
}

std::string GameSpec::state_label(StateId s) const {
  if (!def_.state_labels.empty()) return def_.state_labels.at(s);
  return std::to_string(s);
}

std::optional<ActionId> GameSpec::find_action(std::size_t player, std::string_view label) const {
  const auto& labels = def_.action_labels.at(player);
  for (ActionId a = 0; a < labels.size(); ++a)
    if (labels[a] == label) return a;
  return std::nullopt;
}

std::vector<double> GameSpec::expected_reward(StateId s, JointIndex joint) const {
  auto r = reward(s, joint);
  std::vector<double> out(r.begin(), r.end());
  for (const Outcome& o : outcomes(s, joint)) {
    auto extra = arrival(o.next);
    for (std::size_t p = 0; p < out.size(); ++p) out[p] += o.probability * extra[p];
  }
  return out;
}

Automorphism identity_automorphism(const GameSpec& game, const PlayerPermutation& psi) {
  Automorphism sym;
  sym.players = psi;
  sym.state_map.resize(game.num_states());
  std::iota(sym.state_map.begin(), sym.state_map.end(), StateId{0});
  sym.inverse_state_map = sym.state_map;
  for (std::size_t p = 0; p < game.num_players(); ++p) {
    std::vector<ActionId> id(game.num_actions(p));
    std::iota(id.begin(), id.end(), ActionId{0});
    sym.action_map.push_back(std::move(id));
  }
  return sym;
}

Automorphism GameSpec::automorphism(const PlayerPermutation& psi) const {
  require(psi.size() == num_players(), "permutation size does not match the game");
  for (const Automorphism& sym : def_.automorphisms)
    if (sym.players == psi) return sym;
  return identity_automorphism(*this, psi);
}

// ---------------------------------------------------------------------------
// Stepping
// ---------------------------------------------------------------------------

namespace {

std::size_t sample_index(std::span<const double> probs, Rng& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double u = unif(rng);
  double acc = 0.0;
  for (std::size_t k = 0; k < probs.size(); ++k) {
    acc += probs[k];
    if (u < acc) return k;
  }
  // Rounding left u above the total mass: take the last positive entry.
  for (std::size_t k = probs.size(); k-- > 0;)
    if (probs[k] > 0.0) return k;
  return 0;
}

}  // namespace

StateId sample_initial_state(const GameSpec& game, Rng& rng) {
  return sample_index(game.initial_dist(), rng);
}

StepResult step(const GameSpec& game, StateId s, std::span<const ActionId> actions, Rng& rng) {
  require(s < game.num_states(), "state index out of range");
  require(!game.is_absorbing(s), "cannot step from an absorbing state");
  const JointIndex joint = game.layout().encode(actions);

  auto outs = game.outcomes(s, joint);
  StateId next = outs.front().next;
  if (outs.size() > 1) {
    std::vector<double> probs;
    probs.reserve(outs.size());
    for (const Outcome& o : outs) probs.push_back(o.probability);
    next = outs[sample_index(probs, rng)].next;
  }

  StepResult result;
  auto r = game.reward(s, joint);
  auto extra = game.arrival(next);
  result.rewards.resize(r.size());
  for (std::size_t p = 0; p < r.size(); ++p) result.rewards[p] = r[p] + extra[p];
  result.next = next;
  result.absorbing = game.is_absorbing(next);
  return result;
}

StageRecord run_stage(const GameSpec& game, std::span<Agent* const> agents, std::size_t stage,
                      Rng& rng, std::uint64_t& clock, double gamma) {
  const std::size_t n = game.num_players();
  require(agents.size() == n, "run_stage needs exactly one agent per player");

  StageRecord record;
  record.stage_index = stage;
  record.stage_returns.assign(n, 0.0);

  StateId s = sample_initial_state(game, rng);
  double discount = 1.0;
  JointAction actions(n);
  for (std::size_t k = 0; k < game.max_stage_steps() && !game.is_absorbing(s); ++k) {
    for (std::size_t p = 0; p < n; ++p) {
      Observation obs{s, p, stage, k, clock};
      actions[p] = agents[p]->act(obs);
      require(actions[p] < game.num_actions(p), "agent returned an out-of-range action");
    }
    StepResult res = step(game, s, actions, rng);
    for (std::size_t p = 0; p < n; ++p) record.stage_returns[p] += discount * res.rewards[p];
    discount *= gamma;

    Transition tr;
    tr.state = s;
    tr.joint = game.layout().encode(actions);
    tr.actions = actions;
    tr.rewards = res.rewards;
    tr.next = res.next;
    tr.absorbing = res.absorbing;
    tr.stage_end = res.absorbing || k + 1 == game.max_stage_steps();
    tr.stage = stage;
    tr.clock = clock;
    for (Agent* agent : agents) agent->observe(tr);

    record.trajectory.push_back({s, actions, std::move(res.rewards), res.next});
    s = res.next;
    ++clock;
  }
  for (Agent* agent : agents) agent->end_stage(stage);
  return record;
}

// ---------------------------------------------------------------------------
// Exact evaluation
// ---------------------------------------------------------------------------

std::vector<double> evaluate_returns(const GameSpec& game, const JointPolicy& policy,
                                     std::size_t horizon, double gamma) {
  const std::size_t n = game.num_players();
  const std::size_t s_count = game.num_states();
  // value[s * n + p] with h steps remaining
  std::vector<double> value(s_count * n, 0.0), next_value(s_count * n, 0.0);
  JointDistribution dist;
  for (std::size_t h = 1; h <= horizon; ++h) {
    for (StateId s = 0; s < s_count; ++s) {
      double* out = &next_value[s * n];
      std::fill(out, out + n, 0.0);
      if (game.is_absorbing(s)) continue;
      dist.clear();
      policy(h, s, dist);
      for (const auto& [joint, prob] : dist) {
        if (prob == 0.0) continue;
        auto r = game.reward(s, joint);
        for (std::size_t p = 0; p < n; ++p) out[p] += prob * r[p];
        for (const Outcome& o : game.outcomes(s, joint)) {
          auto extra = game.arrival(o.next);
          const double w = prob * o.probability;
          for (std::size_t p = 0; p < n; ++p) out[p] += w * (extra[p] + gamma * value[o.next * n + p]);
        }
      }
    }
    std::swap(value, next_value);
  }
  std::vector<double> result(n, 0.0);
  for (StateId s = 0; s < s_count; ++s) {
    const double mu = game.initial_dist()[s];
    if (mu == 0.0) continue;
    for (std::size_t p = 0; p < n; ++p) result[p] += mu * value[s * n + p];
  }
  return result;
}

JointPolicy product_policy(const GameSpec& game, const StationaryProfile& profile) {
  require(profile.size() == game.num_players(), "profile has wrong player count");
  return [&game, &profile](std::size_t, StateId s, JointDistribution& out) {
    const auto& layout = game.layout();
    for (JointIndex j = 0; j < layout.num_joint(); ++j) {
      double prob = 1.0;
      for (std::size_t p = 0; p < layout.num_players() && prob > 0.0; ++p)
        prob *= profile[p][s][layout.action_of(j, p)];
      if (prob > 0.0) out.emplace_back(j, prob);
    }
  };
}

StationaryProfile random_profile(const GameSpec& game, Rng& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  StationaryProfile profile(game.num_players());
  for (std::size_t p = 0; p < game.num_players(); ++p) {
    profile[p].resize(game.num_states());
    for (auto& row : profile[p]) {
      row.resize(game.num_actions(p));
      double total = 0.0;
      for (double& x : row) total += (x = unif(rng) + 1e-3);
      for (double& x : row) x /= total;
    }
  }
  return profile;
}

StationaryProfile permute_profile(const GameSpec& game, const Automorphism& sym,
                                  const StationaryProfile& profile) {
  StationaryProfile out(game.num_players());
  for (std::size_t p = 0; p < game.num_players(); ++p) {
    const std::size_t seat = sym.players(p);
    out[seat].assign(game.num_states(), std::vector<double>(game.num_actions(seat), 0.0));
    for (StateId s = 0; s < game.num_states(); ++s)
      for (ActionId a = 0; a < game.num_actions(p); ++a)
        out[seat][sym.state_map[s]][sym.action_map[p][a]] += profile[p][s][a];
  }
  return out;
}

SymmetryReport check_symmetry(const GameSpec& game, const PlayerPermutation& psi,
                              const StationaryProfile& profile, long horizon) {
  require(horizon > 0, "check_symmetry needs a positive horizon");
  require(psi.size() == game.num_players(), "permutation size does not match the game");
  const Automorphism sym = game.automorphism(psi);
  const StationaryProfile moved = permute_profile(game, sym, profile);

  const auto original = evaluate_returns(game, product_policy(game, profile), static_cast<std::size_t>(horizon));
  const auto permuted = evaluate_returns(game, product_policy(game, moved), static_cast<std::size_t>(horizon));

  SymmetryReport report;
  for (std::size_t i = 0; i < game.num_players(); ++i)
    report.max_deviation = std::max(report.max_deviation, std::abs(permuted[psi(i)] - original[i]));
  report.passed = report.max_deviation < 1e-6;
  return report;
}

}  // namespace fcl
