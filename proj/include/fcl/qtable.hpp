#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "fcl/game.hpp"

namespace fcl {

/// Which Q-function a table houses.
struct QRole {
  enum class Kind { kCooperative, kRetaliation, kDefection, kSelfish };
  Kind kind = Kind::kCooperative;
  std::size_t player = 0;  // j for retaliation/defection, i for selfish

  std::string to_string() const;
  friend bool operator==(const QRole&, const QRole&) = default;
};

/// Dense state x column table. Columns are joint actions for team tables and
/// own actions for selfish learners.
class QTable {
 public:
  QTable() = default;
  QTable(std::size_t num_states, std::size_t num_cols, QRole role = {}, double init = 0.0)
      : states_(num_states), cols_(num_cols), role_(role), values_(num_states * num_cols, init) {}

  std::size_t num_states() const { return states_; }
  std::size_t num_cols() const { return cols_; }
  const QRole& role() const { return role_; }

  double& at(StateId s, std::size_t col) { return values_[s * cols_ + col]; }
  double at(StateId s, std::size_t col) const { return values_[s * cols_ + col]; }
  std::span<const double> row(StateId s) const { return {values_.data() + s * cols_, cols_}; }
  const std::vector<double>& values() const { return values_; }

  double max_abs_diff(const QTable& other) const;
  bool all_finite() const;

  /// Flat text: a header line then one "state col value" line per entry.
  void write(std::ostream& os) const;
  static QTable read(std::istream& is);

  friend bool operator==(const QTable&, const QTable&) = default;

 private:
  std::size_t states_ = 0;
  std::size_t cols_ = 0;
  QRole role_;
  std::vector<double> values_;
};

}  // namespace fcl
