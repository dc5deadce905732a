#include <random>

#include "doctest.h"
#include "fcl/environments.hpp"
#include "fcl/matrix_solver.hpp"

using namespace fcl;

namespace {

MatrixView row_player_view(const GameSpec& g) {
  std::vector<double> row0(g.num_joint());
  for (JointIndex j = 0; j < g.num_joint(); ++j) row0[j] = g.reward(0, j)[0];
  return MatrixView::from_joint_row(g.layout(), row0, 0);
}

double expected_against(const MatrixView& m, const MixedStrategy& p, std::size_t col) {
  double v = 0.0;
  for (std::size_t r = 0; r < m.rows(); ++r) v += p[r] * m(r, col);
  return v;
}

}  // namespace

TEST_CASE("maxmin on small games") {
  SUBCASE("rock paper scissors") {
    const auto sol = solve_maxmin(row_player_view(build_matrix_game(MatrixGame::kRPS)));
    CHECK(sol.value == doctest::Approx(0.0).epsilon(1e-9));
    for (double p : sol.row_strategy) CHECK(p == doctest::Approx(1.0 / 3.0));
    for (double p : sol.col_strategy) CHECK(p == doctest::Approx(1.0 / 3.0));
  }
  SUBCASE("1x1") {
    const auto sol = solve_maxmin(MatrixView(1, 1, {4.5}));
    CHECK(sol.value == doctest::Approx(4.5));
    CHECK(sol.row_strategy == MixedStrategy{1.0});
  }
  SUBCASE("matching pennies") {
    const auto sol = solve_maxmin(MatrixView(2, 2, {1, -1, -1, 1}));
    CHECK(sol.value == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(sol.row_strategy[0] == doctest::Approx(0.5));
  }
  SUBCASE("pure saddle") {
    const auto m = row_player_view(build_matrix_game(MatrixGame::kIPD));
    const auto sol = solve_maxmin(m);
    CHECK(sol.value == doctest::Approx(-2.0));
    CHECK(sol.row_strategy[1] == doctest::Approx(1.0));
  }
  CHECK_THROWS_AS(MatrixView(0, 2, {}), ContractViolation);
}

TEST_CASE("pure maxmin and minmax") {
  const auto ipd = row_player_view(build_matrix_game(MatrixGame::kIPD));
  CHECK(pure_maxmin(ipd).index == 1);
  CHECK(pure_maxmin(ipd).value == -2.0);
  CHECK(pure_minmax(ipd).index == 1);
  const auto ich = row_player_view(build_matrix_game(MatrixGame::kICH));
  CHECK(pure_maxmin(ich).index == 0);
  CHECK(pure_maxmin(ich).value == 1.0);
  const auto constant = MatrixView(3, 2, std::vector<double>(6, 7.0));
  CHECK(pure_maxmin(constant).index == 0);
  CHECK(pure_maxmin(constant).value == 7.0);
  CHECK(pure_minmax(MatrixView(3, 1, {1, 5, 2})).index == 0);
  const auto rps = row_player_view(build_matrix_game(MatrixGame::kRPS));
  CHECK(pure_minmax(rps).index == 0);
  CHECK(pure_minmax(rps).value == 1.0);
}

TEST_CASE("greedy joint argmax") {
  QTable q(1, 4);
  CHECK(greedy_joint_argmax(q, 0) == 0);
  const auto aipd = build_matrix_game(MatrixGame::kAIPD);
  for (JointIndex j = 0; j < 4; ++j) q.at(0, j) = aipd.reward(0, j)[0] + aipd.reward(0, j)[1];
  CHECK(greedy_joint_argmax(q, 0) == 1);  // (C, D)
  const auto ipd = build_matrix_game(MatrixGame::kIPD);
  for (JointIndex j = 0; j < 4; ++j) q.at(0, j) = ipd.reward(0, j)[0] + ipd.reward(0, j)[1];
  CHECK(greedy_joint_argmax(q, 0) == 0);  // (C, C)
}

TEST_CASE("lp properties on random matrices") {
  std::mt19937_64 rng(77);
  std::uniform_int_distribution<int> size(1, 6);
  std::uniform_real_distribution<double> entry(-10.0, 10.0);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t rows = size(rng), cols = size(rng);
    std::vector<double> data(rows * cols);
    // integer-valued matrices create plenty of degenerate ties
    for (double& v : data) v = trial % 2 ? entry(rng) : std::round(entry(rng) / 4.0);
    const MatrixView m(rows, cols, data);
    const auto sol = solve_maxmin(m);
    CAPTURE(trial);
    CHECK(is_distribution(sol.row_strategy));
    CHECK(is_distribution(sol.col_strategy));
    CHECK(sol.value >= pure_maxmin(m).value - 1e-9);
    CHECK(sol.value <= pure_minmax(m).value + 1e-9);
    const auto dual = solve_maxmin(m.negated_transpose());
    CHECK(std::abs(sol.value + dual.value) < 1e-6);
    // the row strategy guarantees the value against every column
    for (std::size_t c = 0; c < cols; ++c) CHECK(expected_against(m, sol.row_strategy, c) >= sol.value - 1e-6);
    // complementary slackness: rows in the support earn the value against the column strategy
    for (std::size_t r = 0; r < rows; ++r) {
      double v = 0.0;
      for (std::size_t c = 0; c < cols; ++c) v += m(r, c) * sol.col_strategy[c];
      CHECK(v <= sol.value + 1e-6);
      if (sol.row_strategy[r] > 1e-6) CHECK(v == doctest::Approx(sol.value).epsilon(1e-6));
    }
    const auto again = solve_maxmin(m);
    CHECK(again.value == sol.value);
    CHECK(again.row_strategy == sol.row_strategy);
  }
}
