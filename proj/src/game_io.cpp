#include "fcl/game_io.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <vector>

namespace fcl {

void write_game(std::ostream& os, const GameSpec& game) {
  const auto& def = game.definition();
  const std::size_t n = game.num_players();
  const std::size_t joints = game.num_joint();
  os << std::setprecision(std::numeric_limits<double>::max_digits10);
  os << "game " << game.name() << '\n';
  os << "players " << n << '\n';
  os << "states " << game.num_states() << '\n';
  for (std::size_t p = 0; p < n; ++p) {
    os << "actions " << p;
    for (const auto& label : def.action_labels[p]) os << ' ' << label;
    os << '\n';
  }
  os << "max_stage_steps " << game.max_stage_steps() << '\n';
  for (StateId s = 0; s < game.num_states(); ++s)
    if (game.initial_dist()[s] > 0.0) os << "initial " << s << ' ' << game.initial_dist()[s] << '\n';
  for (StateId s = 0; s < game.num_states(); ++s)
    if (game.is_absorbing(s)) os << "absorbing " << s << '\n';
  for (StateId s = 0; s < def.state_labels.size(); ++s) os << "state_label " << s << ' ' << def.state_labels[s] << '\n';
  for (StateId s = 0; s < game.num_states(); ++s) {
    const auto arrival = game.arrival(s);
    if (std::all_of(arrival.begin(), arrival.end(), [](double x) { return x == 0.0; })) continue;
    os << "arrival " << s;
    for (double x : arrival) os << ' ' << x;
    os << '\n';
  }
  for (StateId s = 0; s < game.num_states(); ++s) {
    if (game.is_absorbing(s)) continue;
    for (JointIndex j = 0; j < joints; ++j) {
      for (const Outcome& o : game.outcomes(s, j))
        os << "transition " << s << ' ' << j << ' ' << o.next << ' ' << o.probability << '\n';
      const auto r = game.reward(s, j);
      if (std::all_of(r.begin(), r.end(), [](double x) { return x == 0.0; })) continue;
      os << "reward " << s << ' ' << j;
      for (double x : r) os << ' ' << x;
      os << '\n';
    }
  }
  for (const Automorphism& sym : game.registered_automorphisms()) {
    os << "symmetry";
    for (std::size_t k : sym.players.mapping()) os << ' ' << k;
    os << " |";
    for (StateId f : sym.state_map) os << ' ' << f;
    for (const auto& g : sym.action_map) {
      os << " |";
      for (ActionId a : g) os << ' ' << a;
    }
    os << '\n';
  }
}

namespace {

class LineReader {
 public:
  LineReader(std::size_t line, std::istringstream& in) : line_(line), in_(in) {}

  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError("line " + std::to_string(line_) + ": " + what);
  }

  template <typename T>
  T next(const char* what) {
    T value{};
    if (!(in_ >> value)) fail(std::string("expected ") + what);
    return value;
  }

  std::size_t index(const char* what, std::size_t bound) {
    long long v = next<long long>(what);
    if (v < 0 || static_cast<std::size_t>(v) >= bound) fail(std::string(what) + " out of range");
    return static_cast<std::size_t>(v);
  }

  std::string rest() {
    std::string text;
    std::getline(in_ >> std::ws, text);
    return text;
  }

  void done() {
    std::string extra;
    if (in_ >> extra) fail("unexpected token '" + extra + "'");
  }

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
  std::istringstream& in_;
};

}  // namespace

GameSpec read_game(std::istream& is) {
  GameDefinition def;
  std::size_t n = 0;
  bool have_states = false;
  std::vector<std::vector<Outcome>> transitions;
  std::vector<double> rewards;
  struct PendingSymmetry {
    std::size_t line;
    std::string text;
  };
  std::vector<PendingSymmetry> symmetries;
  std::vector<std::string> state_labels;

  auto joints = [&]() {
    std::size_t total = 1;
    for (const auto& labels : def.action_labels) total *= labels.size();
    return total;
  };
  bool sized = false;
  auto ensure_tables = [&](LineReader& r) {
    if (n == 0 || !have_states) r.fail("players and states must come first");
    for (const auto& labels : def.action_labels)
      if (labels.empty()) r.fail("actions must be declared for every player before the tables");
    if (!sized) {
      transitions.assign(def.num_states * joints(), {});
      rewards.assign(def.num_states * joints() * n, 0.0);
      sized = true;
    }
  };

  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(is, raw)) {
    ++line_no;
    if (const auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    std::istringstream in(raw);
    std::string key;
    if (!(in >> key)) continue;
    LineReader r(line_no, in);
    if (key == "game") {
      def.name = r.next<std::string>("name");
    } else if (key == "players") {
      n = r.next<std::size_t>("player count");
      if (n < 2) r.fail("a game needs at least two players");
      def.action_labels.assign(n, {});
    } else if (key == "states") {
      def.num_states = r.next<std::size_t>("state count");
      if (def.num_states == 0) r.fail("a game needs at least one state");
      have_states = true;
      def.absorbing.assign(def.num_states, false);
      def.initial.assign(def.num_states, 0.0);
      def.arrival.assign(def.num_states * std::max<std::size_t>(n, 1), 0.0);
    } else if (key == "actions") {
      if (n == 0) r.fail("players must come first");
      if (sized) r.fail("actions must precede the tables");
      const std::size_t p = r.index("player", n);
      std::string label;
      while (in >> label) def.action_labels[p].push_back(label);
      if (def.action_labels[p].empty()) r.fail("player has no actions");
    } else if (key == "max_stage_steps") {
      def.max_stage_steps = r.next<std::size_t>("step count");
    } else if (key == "initial") {
      if (!have_states) r.fail("states must come first");
      const std::size_t s = r.index("state", def.num_states);
      def.initial[s] = r.next<double>("probability");
    } else if (key == "absorbing") {
      if (!have_states) r.fail("states must come first");
      def.absorbing[r.index("state", def.num_states)] = true;
    } else if (key == "state_label") {
      if (!have_states) r.fail("states must come first");
      const std::size_t s = r.index("state", def.num_states);
      state_labels.resize(def.num_states);
      state_labels[s] = r.rest();
    } else if (key == "transition") {
      ensure_tables(r);
      const std::size_t s = r.index("state", def.num_states);
      const std::size_t j = r.index("joint action", joints());
      const std::size_t next = r.index("next state", def.num_states);
      const double p = r.next<double>("probability");
      transitions[s * joints() + j].push_back({next, p});
    } else if (key == "reward") {
      ensure_tables(r);
      const std::size_t s = r.index("state", def.num_states);
      const std::size_t j = r.index("joint action", joints());
      for (std::size_t p = 0; p < n; ++p) rewards[(s * joints() + j) * n + p] = r.next<double>("reward");
    } else if (key == "arrival") {
      ensure_tables(r);
      const std::size_t s = r.index("state", def.num_states);
      for (std::size_t p = 0; p < n; ++p) def.arrival[s * n + p] = r.next<double>("payoff");
    } else if (key == "symmetry") {
      symmetries.push_back({line_no, r.rest()});
      continue;
    } else {
      r.fail("unknown keyword '" + key + "'");
    }
    r.done();
  }

  if (n == 0 || !have_states) throw ParseError("game description lacks players or states");
  std::istringstream none;
  LineReader end(line_no, none);
  ensure_tables(end);
  def.transitions = std::move(transitions);
  def.rewards = std::move(rewards);
  if (!state_labels.empty()) def.state_labels = std::move(state_labels);

  const JointLayout layout([&] {
    std::vector<std::size_t> sizes;
    for (const auto& labels : def.action_labels) sizes.push_back(labels.size());
    return sizes;
  }());
  for (const auto& pending : symmetries) {
    std::vector<std::vector<std::size_t>> parts(1);
    std::istringstream in(pending.text);
    std::string tok;
    while (in >> tok) {
      if (tok == "|") {
        parts.emplace_back();
      } else {
        try {
          parts.back().push_back(std::stoul(tok));
        } catch (const std::exception&) {
          throw ParseError("line " + std::to_string(pending.line) + ": bad symmetry entry '" + tok + "'");
        }
      }
    }
    if (parts.size() != 2 + n)
      throw ParseError("line " + std::to_string(pending.line) + ": symmetry needs " + std::to_string(2 + n) +
                       " '|'-separated parts");
    Automorphism sym;
    try {
      sym.players = PlayerPermutation(parts[0]);
    } catch (const ContractViolation& e) {
      throw ParseError("line " + std::to_string(pending.line) + ": " + e.what());
    }
    sym.state_map = parts[1];
    if (sym.state_map.size() != def.num_states)
      throw ParseError("line " + std::to_string(pending.line) + ": state map has wrong size");
    sym.inverse_state_map.assign(def.num_states, 0);
    for (StateId s = 0; s < def.num_states; ++s) {
      if (sym.state_map[s] >= def.num_states)
        throw ParseError("line " + std::to_string(pending.line) + ": state map out of range");
      sym.inverse_state_map[sym.state_map[s]] = s;
    }
    for (std::size_t p = 0; p < n; ++p) sym.action_map.push_back(parts[2 + p]);
    def.automorphisms.push_back(std::move(sym));
  }
  return GameSpec(std::move(def));
}

GameSpec load_game_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open game file '" + path + "'");
  return read_game(in);
}

}  // namespace fcl
