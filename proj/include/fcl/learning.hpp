#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "fcl/game.hpp"
#include "fcl/qtable.hpp"

namespace fcl {

/// Visit counts keyed by state or by (state, column).
class VisitCounter {
 public:
  VisitCounter() = default;
  explicit VisitCounter(std::size_t num_keys) : counts_(num_keys, 0) {}

  std::uint64_t increment(std::size_t key) { return ++counts_.at(key); }
  std::uint64_t count(std::size_t key) const { return counts_.at(key); }
  std::size_t size() const { return counts_.size(); }

 private:
  std::vector<std::uint64_t> counts_;
};

/// 1 / visits(key). Call after incrementing.
double visit_learning_rate(const VisitCounter& counter, std::size_t key);

/// What the learning-rate denominator counts.
enum class RateKey { kState, kStateAction };

struct LearningParams {
  double gamma = 1.0;
  int retaliation_bonus = 1;
  RateKey rate_key = RateKey::kStateAction;
};

/// Keeps one visit counter and returns the step size for a (state, col) sample.
class RateSchedule {
 public:
  RateSchedule() = default;
  RateSchedule(RateKey key, std::size_t num_states, std::size_t num_cols);

  double next(StateId s, std::size_t col);

 private:
  RateKey key_ = RateKey::kStateAction;
  std::size_t cols_ = 0;
  VisitCounter counter_;
};

/// Counter-based pseudo-random stream: (seed, t, channel) -> uniform [0, 1).
/// Any two holders of the same seed draw the same numbers without sharing state.
class SharedStream {
 public:
  explicit SharedStream(std::uint64_t seed = 0) : seed_(seed) {}

  std::uint64_t seed() const { return seed_; }
  std::uint64_t bits(std::uint64_t t, std::uint64_t channel) const;
  double uniform(std::uint64_t t, std::uint64_t channel) const;
  std::size_t uniform_index(std::uint64_t t, std::uint64_t channel, std::size_t n) const;
  /// Index drawn from a discrete distribution.
  std::size_t sample(std::uint64_t t, std::uint64_t channel, std::span<const double> probs) const;

 private:
  std::uint64_t seed_;
};

/// Decaying exploration: explores at step t iff X_t < epsilon * decay^t.
class ExplorationProcess {
 public:
  ExplorationProcess(double epsilon, double decay, std::uint64_t seed);

  /// Must be called with consecutive t starting at 0.
  bool explore_now(std::uint64_t t);
  /// Same decision without advancing the counter.
  bool peek(std::uint64_t t) const;

  std::uint64_t counter() const { return counter_; }
  double epsilon() const { return epsilon_; }
  double decay() const { return decay_; }
  const SharedStream& stream() const { return stream_; }

  static constexpr std::uint64_t kDecisionChannel = 0;
  /// Channel of seat i's uniform exploration action is kActionChannel + i.
  static constexpr std::uint64_t kActionChannel = 1;

 private:
  double epsilon_;
  double decay_;
  SharedStream stream_;
  std::uint64_t counter_ = 0;
};

// ---------------------------------------------------------------------------
// Value extraction
// ---------------------------------------------------------------------------

/// Mixed maxmin value of `focal` in the state's joint-action row.
double maxmin_value(const QTable& q, const JointLayout& layout, std::size_t focal, StateId s);

/// Memoized maxmin_value per state; entries are dropped when a row changes.
class MaxminCache {
 public:
  MaxminCache() = default;
  explicit MaxminCache(std::size_t num_states) : values_(num_states) {}

  double get(const QTable& q, const JointLayout& layout, std::size_t focal, StateId s);
  void invalidate(StateId s) { values_[s].reset(); }
  void clear();

 private:
  std::vector<std::optional<double>> values_;
};

/// max over j's own actions of qd(s, a_j, coop_-j), with coop the given joint action.
double defect_value(const QTable& qd, const JointLayout& layout, std::size_t j, StateId s,
                    JointIndex coop);

// ---------------------------------------------------------------------------
// Updates. `terminal` means the stage ended; terminal samples bootstrap 0.
// ---------------------------------------------------------------------------

struct QSample {
  StateId state = 0;
  JointIndex joint = 0;
  std::span<const double> rewards;
  StateId next = 0;
  bool terminal = false;
};

/// Independent learner on (state, own action).
void q_update_selfish(QTable& q, StateId s, ActionId own, double reward, StateId next,
                      bool terminal, double alpha, double gamma);

void q_update_minimax(QTable& q, const JointLayout& layout, std::size_t player,
                      const QSample& x, double alpha, double gamma);

void q_update_cooperative(QTable& qc, const QSample& x, double alpha, double gamma);

/// Target r_j + gamma * maxmin of j against the team at the next state.
void q_update_retaliation(QTable& qr, const JointLayout& layout, std::size_t j, const QSample& x,
                          double alpha, double gamma, MaxminCache* cache = nullptr);

/// Target r_j + gamma * V^d_j(next), where the others follow argmax Q^c(next).
void q_update_defection(QTable& qd, const QTable& qc, const JointLayout& layout, std::size_t j,
                        const QSample& x, double alpha, double gamma);

}  // namespace fcl
