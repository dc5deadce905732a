#include "fcl/learning.hpp"

#include <cmath>
#include <limits>

#include "fcl/matrix_solver.hpp"

namespace fcl {

double visit_learning_rate(const VisitCounter& counter, std::size_t key) {
  const auto n = counter.count(key);
  require(n > 0, "learning rate requested for an unvisited key");
  return 1.0 / static_cast<double>(n);
}

RateSchedule::RateSchedule(RateKey key, std::size_t num_states, std::size_t num_cols)
    : key_(key), cols_(num_cols),
      counter_(key == RateKey::kState ? num_states : num_states * num_cols) {}

double RateSchedule::next(StateId s, std::size_t col) {
  const std::size_t k = key_ == RateKey::kState ? s : s * cols_ + col;
  counter_.increment(k);
  return visit_learning_rate(counter_, k);
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t SharedStream::bits(std::uint64_t t, std::uint64_t channel) const {
  return splitmix64(splitmix64(splitmix64(seed_) ^ t) + channel);
}

double SharedStream::uniform(std::uint64_t t, std::uint64_t channel) const {
  return static_cast<double>(bits(t, channel) >> 11) * 0x1.0p-53;
}

std::size_t SharedStream::uniform_index(std::uint64_t t, std::uint64_t channel, std::size_t n) const {
  require(n > 0, "uniform index over an empty range");
  const auto k = static_cast<std::size_t>(uniform(t, channel) * static_cast<double>(n));
  return k < n ? k : n - 1;
}

std::size_t SharedStream::sample(std::uint64_t t, std::uint64_t channel,
                                 std::span<const double> probs) const {
  require(!probs.empty(), "sampling from an empty distribution");
  const double u = uniform(t, channel);
  double acc = 0.0;
  std::size_t last = 0;
  for (std::size_t k = 0; k < probs.size(); ++k) {
    if (probs[k] <= 0.0) continue;
    acc += probs[k];
    last = k;
    if (u < acc) return k;
  }
  return last;
}

ExplorationProcess::ExplorationProcess(double epsilon, double decay, std::uint64_t seed)
    : epsilon_(epsilon), decay_(decay), stream_(seed) {
  require(epsilon >= 0.0 && epsilon <= 1.0, "epsilon must lie in [0, 1]");
  require(decay > 0.0 && decay <= 1.0, "decay must lie in (0, 1]");
}

bool ExplorationProcess::peek(std::uint64_t t) const {
  if (epsilon_ == 0.0) return false;
  const double threshold = epsilon_ * std::pow(decay_, static_cast<double>(t));
  return stream_.uniform(t, kDecisionChannel) < threshold;
}

bool ExplorationProcess::explore_now(std::uint64_t t) {
  require(t == counter_, "exploration step out of order");
  ++counter_;
  return peek(t);
}

double maxmin_value(const QTable& q, const JointLayout& layout, std::size_t focal, StateId s) {
  if (layout.num_actions(focal) == 1 || layout.num_others(focal) == 1) {
    // Degenerate matrix: a single row or column needs no LP.
    const auto view = MatrixView::from_joint_row(layout, q.row(s), focal);
    return layout.num_others(focal) == 1 ? pure_maxmin(view).value : pure_minmax(view).value;
  }
  return solve_maxmin(MatrixView::from_joint_row(layout, q.row(s), focal)).value;
}

double MaxminCache::get(const QTable& q, const JointLayout& layout, std::size_t focal, StateId s) {
  auto& slot = values_.at(s);
  if (!slot) slot = maxmin_value(q, layout, focal, s);
  return *slot;
}

void MaxminCache::clear() {
  for (auto& v : values_) v.reset();
}

double defect_value(const QTable& qd, const JointLayout& layout, std::size_t j, StateId s,
                    JointIndex coop) {
  const JointIndex others = layout.others_index(coop, j);
  double best = -std::numeric_limits<double>::infinity();
  for (ActionId a = 0; a < layout.num_actions(j); ++a)
    best = std::max(best, qd.at(s, layout.combine(j, a, others)));
  return best;
}

namespace {

void blend(double& entry, double target, double alpha) { entry += alpha * (target - entry); }

}  // namespace

void q_update_selfish(QTable& q, StateId s, ActionId own, double reward, StateId next,
                      bool terminal, double alpha, double gamma) {
  double boot = 0.0;
  if (!terminal) {
    const auto row = q.row(next);
    boot = row[argmax_index(row)];
  }
  blend(q.at(s, own), reward + gamma * boot, alpha);
}

void q_update_minimax(QTable& q, const JointLayout& layout, std::size_t player, const QSample& x,
                      double alpha, double gamma) {
  const double boot = x.terminal ? 0.0 : maxmin_value(q, layout, player, x.next);
  blend(q.at(x.state, x.joint), x.rewards[player] + gamma * boot, alpha);
}

void q_update_cooperative(QTable& qc, const QSample& x, double alpha, double gamma) {
  double total = 0.0;
  for (double r : x.rewards) total += r;
  double boot = 0.0;
  if (!x.terminal) {
    const auto row = qc.row(x.next);
    boot = row[argmax_index(row)];
  }
  blend(qc.at(x.state, x.joint), total + gamma * boot, alpha);
}

void q_update_retaliation(QTable& qr, const JointLayout& layout, std::size_t j, const QSample& x,
                          double alpha, double gamma, MaxminCache* cache) {
  double boot = 0.0;
  if (!x.terminal)
    boot = cache ? cache->get(qr, layout, j, x.next) : maxmin_value(qr, layout, j, x.next);
  blend(qr.at(x.state, x.joint), x.rewards[j] + gamma * boot, alpha);
  if (cache) cache->invalidate(x.state);
}

void q_update_defection(QTable& qd, const QTable& qc, const JointLayout& layout, std::size_t j,
                        const QSample& x, double alpha, double gamma) {
  double boot = 0.0;
  if (!x.terminal) boot = defect_value(qd, layout, j, x.next, greedy_joint_argmax(qc, x.next));
  blend(qd.at(x.state, x.joint), x.rewards[j] + gamma * boot, alpha);
}

}  // namespace fcl
