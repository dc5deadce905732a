#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "fcl/qtable.hpp"

namespace fcl {

/// Payoff matrix of a focal player: rows are its actions, columns the
/// opponents' joint actions.
class MatrixView {
 public:
  MatrixView(std::size_t rows, std::size_t cols, std::vector<double> values);
  MatrixView(std::size_t rows, std::size_t cols) : MatrixView(rows, cols, std::vector<double>(rows * cols, 0.0)) {}

  /// Focal player's view of one state of a joint-action table.
  static MatrixView from_joint_row(const JointLayout& layout, std::span<const double> joint_row,
                                   std::size_t focal);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double operator()(std::size_t r, std::size_t c) const { return values_[r * cols_ + c]; }
  double& operator()(std::size_t r, std::size_t c) { return values_[r * cols_ + c]; }

  MatrixView negated_transpose() const;

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<double> values_;
};

using MixedStrategy = std::vector<double>;

bool is_distribution(const MixedStrategy& p, double tol = 1e-9);

class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct MaxminSolution {
  MixedStrategy row_strategy;  // the focal player's maxmin strategy
  MixedStrategy col_strategy;  // the opponents' minmax (punishing) strategy
  double value = 0.0;
};

/// max over mixed row strategies of min over columns, by simplex.
MaxminSolution solve_maxmin(const MatrixView& m);

struct PureChoice {
  std::size_t index = 0;
  double value = 0.0;
};

/// max over rows of min over columns; lowest row wins ties.
PureChoice pure_maxmin(const MatrixView& m);
/// min over columns of max over rows; lowest column wins ties.
PureChoice pure_minmax(const MatrixView& m);

/// Index of the largest entry, lowest index on ties.
std::size_t argmax_index(std::span<const double> values);

/// Joint action maximizing q(s, .), lowest joint index on ties.
JointIndex greedy_joint_argmax(const QTable& q, StateId s);

}  // namespace fcl
