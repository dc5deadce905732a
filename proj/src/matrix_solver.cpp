#include "fcl/matrix_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace fcl {

MatrixView::MatrixView(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
  require(rows_ > 0 && cols_ > 0, "matrix needs at least one row and one column");
  require(values_.size() == rows_ * cols_, "matrix data has wrong size");
}

MatrixView MatrixView::from_joint_row(const JointLayout& layout, std::span<const double> joint_row,
                                      std::size_t focal) {
  const std::size_t rows = layout.num_actions(focal);
  const std::size_t cols = layout.num_others(focal);
  std::vector<double> values(rows * cols);
  for (JointIndex j = 0; j < layout.num_joint(); ++j)
    values[layout.action_of(j, focal) * cols + layout.others_index(j, focal)] = joint_row[j];
  return MatrixView(rows, cols, std::move(values));
}

MatrixView MatrixView::negated_transpose() const {
  MatrixView out(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) out(c, r) = -(*this)(r, c);
  return out;
}

bool is_distribution(const MixedStrategy& p, double tol) {
  double total = 0.0;
  for (double x : p) {
    if (!(x >= -tol)) return false;
    total += x;
  }
  return std::abs(total - 1.0) <= tol;
}

namespace {

void normalize(MixedStrategy& p) {
  double total = 0.0;
  for (double& x : p) {
    if (x < 0.0) x = 0.0;
    total += x;
  }
  for (double& x : p) x /= total;
}

}  // namespace

// Shifts the matrix positive and solves the column player's LP
//   max 1'y  s.t.  A y <= 1, y >= 0
// with a dense tableau and Bland's rule. The row strategy comes from the
// optimal dual prices of the slack columns.
MaxminSolution solve_maxmin(const MatrixView& m) {
  const std::size_t rows = m.rows();
  const std::size_t cols = m.cols();
  double lowest = std::numeric_limits<double>::infinity();
  double highest = -lowest;
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) {
      const double v = m(r, c);
      if (!std::isfinite(v)) throw SolverError("matrix entry is not finite");
      lowest = std::min(lowest, v);
      highest = std::max(highest, v);
    }
  const double shift = 1.0 - lowest;
  const double eps = 1e-12 * std::max(1.0, highest + shift);

  const std::size_t width = cols + rows + 1;
  const std::size_t rhs = width - 1;
  std::vector<double> t((rows + 1) * width, 0.0);
  auto cell = [&](std::size_t r, std::size_t c) -> double& { return t[r * width + c]; };
  std::vector<std::size_t> basis(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) cell(r, c) = m(r, c) + shift;
    cell(r, cols + r) = 1.0;
    cell(r, rhs) = 1.0;
    basis[r] = cols + r;
  }
  for (std::size_t c = 0; c < cols; ++c) cell(rows, c) = -1.0;

  const std::size_t max_pivots = 50 * (rows + cols) + 1000;
  std::size_t pivots = 0;
  for (;; ++pivots) {
    if (pivots > max_pivots) throw SolverError("simplex did not terminate");
    std::size_t enter = width;
    for (std::size_t c = 0; c < rhs; ++c)
      if (cell(rows, c) < -eps) {
        enter = c;
        break;
      }
    if (enter == width) break;

    std::size_t leave = rows;
    double best_ratio = std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < rows; ++r) {
      const double a = cell(r, enter);
      if (a <= eps) continue;
      const double ratio = cell(r, rhs) / a;
      if (ratio < best_ratio - eps || (ratio <= best_ratio + eps && leave < rows && basis[r] < basis[leave])) {
        if (ratio < best_ratio) best_ratio = ratio;
        leave = r;
      }
    }
    if (leave == rows) throw SolverError("linear program is unbounded");

    const double pivot = cell(leave, enter);
    for (std::size_t c = 0; c < width; ++c) cell(leave, c) /= pivot;
    for (std::size_t r = 0; r <= rows; ++r) {
      if (r == leave) continue;
      const double factor = cell(r, enter);
      if (factor == 0.0) continue;
      for (std::size_t c = 0; c < width; ++c) cell(r, c) -= factor * cell(leave, c);
    }
    basis[leave] = enter;
  }

  const double total = cell(rows, rhs);
  if (!(total > 0.0)) throw SolverError("degenerate linear program");

  MaxminSolution sol;
  sol.col_strategy.assign(cols, 0.0);
  for (std::size_t r = 0; r < rows; ++r)
    if (basis[r] < cols) sol.col_strategy[basis[r]] = cell(r, rhs);
  sol.row_strategy.assign(rows, 0.0);
  for (std::size_t r = 0; r < rows; ++r) sol.row_strategy[r] = cell(rows, cols + r);
  normalize(sol.col_strategy);
  normalize(sol.row_strategy);
  sol.value = 1.0 / total - shift;
  return sol;
}

PureChoice pure_maxmin(const MatrixView& m) {
  PureChoice best{0, -std::numeric_limits<double>::infinity()};
  for (std::size_t r = 0; r < m.rows(); ++r) {
    double worst = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < m.cols(); ++c) worst = std::min(worst, m(r, c));
    if (worst > best.value) best = {r, worst};
  }
  return best;
}

PureChoice pure_minmax(const MatrixView& m) {
  PureChoice best{0, std::numeric_limits<double>::infinity()};
  for (std::size_t c = 0; c < m.cols(); ++c) {
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < m.rows(); ++r) top = std::max(top, m(r, c));
    if (top < best.value) best = {c, top};
  }
  return best;
}

std::size_t argmax_index(std::span<const double> values) {
  require(!values.empty(), "argmax of an empty range");
  std::size_t best = 0;
  for (std::size_t k = 1; k < values.size(); ++k)
    if (values[k] > values[best]) best = k;
  return best;
}

JointIndex greedy_joint_argmax(const QTable& q, StateId s) {
  require(s < q.num_states(), "state index out of range");
  return argmax_index(q.row(s));
}

}  // namespace fcl
