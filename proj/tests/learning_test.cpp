#include <cmath>
#include <sstream>

#include "doctest.h"
#include "fcl/environments.hpp"
#include "fcl/learning.hpp"
#include "fcl/matrix_solver.hpp"

using namespace fcl;

namespace {

QTable payoff_table(const GameSpec& g, std::size_t player) {
  QTable q(g.num_states(), g.num_joint());
  for (JointIndex j = 0; j < g.num_joint(); ++j) q.at(0, j) = g.reward(0, j)[player];
  return q;
}

}  // namespace

TEST_CASE("visit learning rate") {
  VisitCounter c(3);
  c.increment(1);
  CHECK(visit_learning_rate(c, 1) == 1.0);
  c.increment(1);
  c.increment(1);
  c.increment(1);
  CHECK(visit_learning_rate(c, 1) == 0.25);
  CHECK_THROWS_AS(visit_learning_rate(c, 0), ContractViolation);

  RateSchedule by_state(RateKey::kState, 2, 4);
  CHECK(by_state.next(0, 0) == 1.0);
  CHECK(by_state.next(0, 3) == 0.5);
  RateSchedule by_pair(RateKey::kStateAction, 2, 4);
  CHECK(by_pair.next(0, 0) == 1.0);
  CHECK(by_pair.next(0, 3) == 1.0);
  CHECK(by_pair.next(0, 3) == 0.5);
}

TEST_CASE("selfish update") {
  QTable q(1, 1);
  q_update_selfish(q, 0, 0, 5.0, 0, false, 1.0, 0.0);
  CHECK(q.at(0, 0) == 5.0);
  q_update_selfish(q, 0, 0, 100.0, 0, false, 0.0, 0.9);
  CHECK(q.at(0, 0) == 5.0);
  QTable chain(1, 1);
  for (int k = 0; k < 200; ++k) q_update_selfish(chain, 0, 0, 1.0, 0, false, 0.5, 0.5);
  CHECK(std::abs(chain.at(0, 0) - 2.0) < 1e-6);
}

TEST_CASE("minimax update") {
  const auto ipd = build_matrix_game(MatrixGame::kIPD);
  QTable q = payoff_table(ipd, 0);
  const std::vector<double> r{0.0, 0.0};
  q_update_minimax(q, ipd.layout(), 0, {0, 0, r, 0, false}, 1.0, 1.0);
  CHECK(q.at(0, 0) == doctest::Approx(-2.0));

  const auto rps = build_matrix_game(MatrixGame::kRPS);
  QTable root(2, rps.num_joint());
  for (JointIndex j = 0; j < rps.num_joint(); ++j) root.at(1, j) = rps.reward(0, j)[0];
  q_update_minimax(root, rps.layout(), 0, {0, 4, r, 1, false}, 1.0, 1.0);
  CHECK(std::abs(root.at(0, 4)) < 1e-9);

  const JointLayout single({1, 3});
  QTable flat(2, 3);
  flat.at(1, 0) = 4;
  flat.at(1, 1) = 2;
  flat.at(1, 2) = 6;
  q_update_minimax(flat, single, 0, {0, 0, r, 1, false}, 1.0, 1.0);
  CHECK(flat.at(0, 0) == 2.0);
}

TEST_CASE("cooperative update") {
  const auto ipd = build_matrix_game(MatrixGame::kIPD);
  QTable qc(1, 4);
  const auto r = ipd.reward(0, 0);
  q_update_cooperative(qc, {0, 0, r, 0, true}, 1.0, 0.0);
  CHECK(qc.at(0, 0) == -2.0);
  const auto aipd = build_matrix_game(MatrixGame::kAIPD);
  q_update_cooperative(qc, {0, 1, aipd.reward(0, 1), 0, true}, 1.0, 1.0);
  CHECK(qc.at(0, 1) == 7.0);
  const QTable before = qc;
  q_update_cooperative(qc, {0, 2, aipd.reward(0, 2), 0, false}, 0.0, 1.0);
  CHECK(qc == before);
}

TEST_CASE("retaliation update") {
  const auto ipd = build_matrix_game(MatrixGame::kIPD);
  const auto rps = build_matrix_game(MatrixGame::kRPS);
  for (const auto* g : {&ipd, &rps}) {
    QTable qr(2, g->num_joint());
    for (JointIndex j = 0; j < g->num_joint(); ++j) qr.at(1, j) = g->reward(0, j)[0];
    const std::vector<double> zero{0.0, 0.0};
    MaxminCache cache(2);
    q_update_retaliation(qr, g->layout(), 0, {0, 0, zero, 1, false}, 1.0, 1.0, &cache);
    CHECK(qr.at(0, 0) == doctest::Approx(g == &ipd ? -2.0 : 0.0).epsilon(1e-9));
  }
  // a single opponent action reduces to the plain max
  const JointLayout layout({3, 1});
  QTable qr(2, 3);
  qr.at(1, 0) = 1;
  qr.at(1, 1) = 8;
  qr.at(1, 2) = 3;
  const std::vector<double> r{1.0, 0.0};
  q_update_retaliation(qr, layout, 0, {0, 0, r, 1, false}, 1.0, 1.0);
  CHECK(qr.at(0, 0) == 9.0);
}

TEST_CASE("defection update") {
  const auto ipd = build_matrix_game(MatrixGame::kIPD);
  const auto ich = build_matrix_game(MatrixGame::kICH);
  for (const auto* g : {&ipd, &ich}) {
    QTable qc(1, 4), qd(1, 4);
    for (JointIndex j = 0; j < 4; ++j) {
      q_update_cooperative(qc, {0, j, g->reward(0, j), 0, true}, 1.0, 1.0);
      q_update_defection(qd, qc, g->layout(), 1, {0, j, g->reward(0, j), 0, true}, 1.0, 1.0);
    }
    const double vd = defect_value(qd, g->layout(), 1, 0, greedy_joint_argmax(qc, 0));
    CHECK(vd == (g == &ipd ? 0.0 : 3.0));
  }
  const JointLayout solo({1, 1});
  QTable qc(1, 1), qd(1, 1);
  const std::vector<double> r{2.0, 2.0};
  q_update_cooperative(qc, {0, 0, r, 0, true}, 1.0, 1.0);
  q_update_defection(qd, qc, solo, 0, {0, 0, r, 0, true}, 1.0, 1.0);
  CHECK(defect_value(qd, solo, 0, 0, 0) == qc.at(0, 0) / 2.0);
}

TEST_CASE("updates with zero step leave tables alone") {
  const auto g = build_matrix_game(MatrixGame::kRPS);
  Rng rng(4);
  std::uniform_real_distribution<double> u(-3, 3);
  QTable q(2, 9);
  for (StateId s = 0; s < 2; ++s)
    for (JointIndex j = 0; j < 9; ++j) q.at(s, j) = u(rng);
  const QTable before = q;
  const std::vector<double> r{1.0, -1.0};
  const QSample x{0, 3, r, 1, false};
  q_update_cooperative(q, x, 0.0, 1.0);
  q_update_minimax(q, g.layout(), 0, x, 0.0, 1.0);
  q_update_retaliation(q, g.layout(), 1, x, 0.0, 1.0);
  q_update_defection(q, before, g.layout(), 1, x, 0.0, 1.0);
  q_update_selfish(q, 0, 1, 2.0, 1, false, 0.0, 1.0);
  CHECK(q == before);
}

TEST_CASE("exploration process") {
  ExplorationProcess never(0.0, 0.5, 1);
  ExplorationProcess always(1.0, 1.0, 1);
  for (std::uint64_t t = 0; t < 1000; ++t) {
    CHECK_FALSE(never.explore_now(t));
    CHECK(always.explore_now(t));
  }
  CHECK_THROWS_AS(always.explore_now(7), ContractViolation);

  // frequency over 0..999 with d = 0.995 against the closed-form mean, across seeds
  const int seeds = 40;
  double hits = 0.0;
  for (int seed = 0; seed < seeds; ++seed) {
    ExplorationProcess p(1.0, 0.995, static_cast<std::uint64_t>(seed));
    for (std::uint64_t t = 0; t < 1000; ++t) hits += p.explore_now(t);
  }
  const double mean = (1.0 - std::pow(0.995, 1000)) / (1.0 - 0.995) / 1000.0;
  double var = 0.0;
  for (int t = 0; t < 1000; ++t) {
    const double p = std::pow(0.995, t);
    var += p * (1 - p);
  }
  const double sd = std::sqrt(var * seeds) / (1000.0 * seeds);
  CHECK(std::abs(hits / (1000.0 * seeds) - mean) < 4.0 * sd);
}

TEST_CASE("shared stream helpers") {
  SharedStream s(99);
  CHECK(s.bits(3, 1) == SharedStream(99).bits(3, 1));
  CHECK(s.bits(3, 1) != s.bits(3, 2));
  int counts[3] = {0, 0, 0};
  for (std::uint64_t t = 0; t < 30000; ++t) ++counts[s.uniform_index(t, 5, 3)];
  for (int c : counts) CHECK(std::abs(c / 30000.0 - 1.0 / 3.0) < 0.015);
  const std::vector<double> probs{0.0, 1.0, 0.0};
  for (std::uint64_t t = 0; t < 100; ++t) CHECK(s.sample(t, 0, probs) == 1);
}

TEST_CASE("q-table text round trip") {
  QTable q(3, 2, {QRole::Kind::kRetaliation, 1});
  q.at(0, 1) = 1.0 / 3.0;
  q.at(2, 0) = -1e-300;
  std::stringstream ss;
  q.write(ss);
  const QTable back = QTable::read(ss);
  CHECK(back == q);
  std::stringstream broken("qtable cooperative 2 2\n0 0 1\n");
  CHECK_THROWS(QTable::read(broken));
}
