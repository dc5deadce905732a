#include "fcl/qtable.hpp"

#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

namespace fcl {

std::string QRole::to_string() const {
  switch (kind) {
    case Kind::kCooperative:
      return "cooperative";
    case Kind::kRetaliation:
      return "retaliation:" + std::to_string(player);
    case Kind::kDefection:
      return "defection:" + std::to_string(player);
    case Kind::kSelfish:
      return "selfish:" + std::to_string(player);
  }
  return "unknown";
}

namespace {

QRole parse_role(const std::string& text) {
  QRole role;
  const auto colon = text.find(':');
  const std::string head = text.substr(0, colon);
  if (head == "cooperative") return role;
  if (colon == std::string::npos) throw std::runtime_error("bad q-table role: " + text);
  if (head == "retaliation")
    role.kind = QRole::Kind::kRetaliation;
  else if (head == "defection")
    role.kind = QRole::Kind::kDefection;
  else if (head == "selfish")
    role.kind = QRole::Kind::kSelfish;
  else
    throw std::runtime_error("bad q-table role: " + text);
  role.player = std::stoul(text.substr(colon + 1));
  return role;
}

}  // namespace

double QTable::max_abs_diff(const QTable& other) const {
  require(states_ == other.states_ && cols_ == other.cols_, "q-table shapes differ");
  double worst = 0.0;
  for (std::size_t k = 0; k < values_.size(); ++k)
    worst = std::max(worst, std::abs(values_[k] - other.values_[k]));
  return worst;
}

bool QTable::all_finite() const {
  for (double v : values_)
    if (!std::isfinite(v)) return false;
  return true;
}

void QTable::write(std::ostream& os) const {
  os << "qtable " << role_.to_string() << ' ' << states_ << ' ' << cols_ << '\n';
  os << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (std::size_t s = 0; s < states_; ++s)
    for (std::size_t c = 0; c < cols_; ++c) os << s << ' ' << c << ' ' << at(s, c) << '\n';
}

QTable QTable::read(std::istream& is) {
  std::string word, role;
  std::size_t states = 0, cols = 0;
  if (!(is >> word >> role >> states >> cols) || word != "qtable")
    throw std::runtime_error("missing q-table header");
  QTable q(states, cols, parse_role(role));
  std::size_t s = 0, c = 0;
  double v = 0.0;
  std::size_t seen = 0;
  while (seen < states * cols && is >> s >> c >> v) {
    if (s >= states || c >= cols) throw std::runtime_error("q-table entry out of range");
    q.at(s, c) = v;
    ++seen;
  }
  if (seen != states * cols) throw std::runtime_error("q-table is truncated");
  return q;
}

}  // namespace fcl
