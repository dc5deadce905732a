#include "fcl/environments.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <deque>
#include <numeric>
#include <set>
#include <sstream>

namespace fcl {

namespace {

/// Absorbing states that pay a fixed vector on arrival, keyed by that vector.
class PayoutStates {
 public:
  explicit PayoutStates(std::size_t first_id) : next_id_(first_id) {}

  StateId get(const std::vector<double>& payout) {
    auto [it, inserted] = ids_.try_emplace(payout, next_id_);
    if (inserted) {
      order_.push_back(payout);
      ++next_id_;
    }
    return it->second;
  }
  std::optional<StateId> find(const std::vector<double>& payout) const {
    auto it = ids_.find(payout);
    if (it == ids_.end()) return std::nullopt;
    return it->second;
  }
  const std::vector<std::vector<double>>& payouts() const { return order_; }
  std::size_t next_id() const { return next_id_; }

 private:
  std::size_t next_id_;
  std::map<std::vector<double>, StateId> ids_;
  std::vector<std::vector<double>> order_;
};

std::string payout_label(const std::vector<double>& payout) {
  std::ostringstream os;
  os << "payout(";
  for (std::size_t p = 0; p < payout.size(); ++p) os << (p ? "," : "") << payout[p];
  os << ")";
  return os.str();
}

std::vector<double> permute_vector(const PlayerPermutation& psi, const std::vector<double>& v) {
  std::vector<double> out(v.size());
  for (std::size_t p = 0; p < v.size(); ++p) out[psi(p)] = v[p];
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Matrix games
// ---------------------------------------------------------------------------

MatrixGameDef matrix_game_def(MatrixGame which) {
  switch (which) {
    case MatrixGame::kIPD:
      return {"ipd", {{"C", "D"}, {"C", "D"}}, {{-1, -1}, {-3, 0}, {0, -3}, {-2, -2}}};
    case MatrixGame::kAIPD:
      return {"aipd", {{"C", "D"}, {"C", "D"}}, {{-1, -1}, {-3, 10}, {10, -3}, {-2, -2}}};
    case MatrixGame::kICH:
      return {"ich",
              {{"Swerve", "Straight"}, {"Swerve", "Straight"}},
              {{2, 2}, {1, 3}, {3, 1}, {0, 0}}};
    case MatrixGame::kRPS:
      return {"rps",
              {{"R", "P", "S"}, {"R", "P", "S"}},
              {{0, 0}, {-1, 1}, {1, -1}, {1, -1}, {0, 0}, {-1, 1}, {-1, 1}, {1, -1}, {0, 0}}};
  }
  throw LookupError("unknown matrix game");
}

GameSpec build_matrix_game(MatrixGame which) { return build_matrix_game(matrix_game_def(which)); }

GameSpec build_matrix_game(const MatrixGameDef& def) {
  JointLayout layout([&] {
    std::vector<std::size_t> sizes;
    for (const auto& labels : def.action_labels) sizes.push_back(labels.size());
    return sizes;
  }());
  require(def.payoffs.size() == layout.num_joint(), "payoff tensor does not match the action sets");

  GameDefinition g;
  g.name = def.name;
  g.action_labels = def.action_labels;
  g.num_states = 1;
  g.state_labels = {"s0"};
  g.transitions.assign(layout.num_joint(), {Outcome{0, 1.0}});
  for (const auto& payoff : def.payoffs) {
    require(payoff.size() == layout.num_players(), "payoff entry has wrong length");
    g.rewards.insert(g.rewards.end(), payoff.begin(), payoff.end());
  }
  g.absorbing = {false};
  g.initial = {1.0};
  g.max_stage_steps = 1;
  return GameSpec(std::move(g));
}

// ---------------------------------------------------------------------------
// Grid games
// ---------------------------------------------------------------------------

namespace {

/// Layout rows use '#' for walls, 'A'/'B' for starts, '.' for empty cells;
/// any other character names a reward cell from `legend`.
GridWorldDef parse_layout(std::string name, const std::vector<std::string>& rows,
                          const std::map<char, RewardCell>& legend) {
  GridWorldDef def;
  def.name = std::move(name);
  def.height = static_cast<int>(rows.size());
  def.width = static_cast<int>(rows.front().size());
  for (int r = 0; r < def.height; ++r) {
    for (int c = 0; c < def.width; ++c) {
      const char ch = rows[r][c];
      const Cell cell{r, c};
      if (ch == '#') {
        def.walls.push_back(cell);
      } else if (ch == 'A') {
        def.start_a = cell;
      } else if (ch == 'B') {
        def.start_b = cell;
      } else if (ch != '.') {
        RewardCell rc = legend.at(ch);
        rc.cell = cell;
        def.reward_cells.push_back(rc);
      }
    }
  }
  return def;
}

RewardCell owner_only(std::size_t owner, double value) {
  return {{}, RewardCell::Scope::kOwnerOnly, owner, value, 0.0};
}
RewardCell any_player(double value) { return {{}, RewardCell::Scope::kAnyPlayer, 0, value, 0.0}; }
RewardCell reacher_other(double value, double other) {
  return {{}, RewardCell::Scope::kReacherOther, 0, value, other};
}

std::string position_label(const GridPositions& pos) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "A@%d,%d B@%d,%d", pos.a.row, pos.a.col, pos.b.row, pos.b.col);
  return buf;
}

struct Move {
  double prob;
  Cell a;
  Cell b;
};

}  // namespace

GridWorldDef grid_world_def(GridGame which) {
  switch (which) {
    case GridGame::kGridPD:
      return parse_layout("grid_pd", {"####$####", "a..A.B..b"},
                          {{'$', any_player(100)}, {'a', owner_only(0, 100)}, {'b', owner_only(1, 100)}});
    case GridGame::kCompromise:
      return parse_layout("compromise", {".#b#.#a#.", "..A...B.."},
                          {{'a', owner_only(0, 100)}, {'b', owner_only(1, 100)}});
    case GridGame::kCoordination:
      return parse_layout("coordination", {"b.a", "...", "A.B"},
                          {{'a', owner_only(0, 100)}, {'b', owner_only(1, 100)}});
    case GridGame::kTemptation:
      return parse_layout("temptation", {"tABt", "T..T"},
                          {{'t', reacher_other(20, -10)}, {'T', reacher_other(40, -20)}});
  }
  throw LookupError("unknown grid game");
}

GameSpec build_grid_game(GridGame which) { return build_grid_game(grid_world_def(which)); }

GameSpec build_grid_game(const GridWorldDef& def) {
  require(def.width > 0 && def.height > 0, "grid must be non-empty");
  const std::set<Cell> walls(def.walls.begin(), def.walls.end());
  std::map<Cell, RewardCell> rewards;
  for (const RewardCell& rc : def.reward_cells) {
    require(!walls.count(rc.cell), "reward cell placed on a wall");
    rewards.emplace(rc.cell, rc);
  }
  auto in_bounds = [&](Cell c) { return c.row >= 0 && c.row < def.height && c.col >= 0 && c.col < def.width; };
  auto free_cell = [&](Cell c) { return in_bounds(c) && !walls.count(c); };
  require(free_cell(def.start_a) && free_cell(def.start_b), "start positions must be free cells");
  require(def.start_a != def.start_b, "start positions must be distinct");
  require(!rewards.count(def.start_a) && !rewards.count(def.start_b), "start positions must not pay rewards");

  auto target = [&](Cell c, ActionId a) {
    Cell t = c;
    switch (a) {
      case kUp: --t.row; break;
      case kDown: ++t.row; break;
      case kLeft: --t.col; break;
      case kRight: ++t.col; break;
      default: break;
    }
    return free_cell(t) ? t : c;
  };
  auto resolve = [&](Cell pa, Cell pb, ActionId aa, ActionId ab) -> std::vector<Move> {
    const Cell ta = target(pa, aa);
    const Cell tb = target(pb, ab);
    const bool moving_a = ta != pa;
    const bool moving_b = tb != pb;
    if (moving_a && moving_b && ta == pb && tb == pa) return {{1.0, pa, pb}};
    if (ta == tb) {
      if (moving_a && moving_b)
        return {{def.contest_win_prob, ta, pb}, {1.0 - def.contest_win_prob, pa, tb}};
      return {{1.0, pa, pb}};
    }
    return {{1.0, ta, tb}};
  };
  auto payout_of = [&](Cell na, Cell nb) -> std::optional<std::vector<double>> {
    std::vector<double> pay(2, 0.0);
    bool triggered = false;
    const Cell where[2] = {na, nb};
    for (std::size_t p = 0; p < 2; ++p) {
      auto it = rewards.find(where[p]);
      if (it == rewards.end()) continue;
      const RewardCell& rc = it->second;
      switch (rc.scope) {
        case RewardCell::Scope::kOwnerOnly:
          if (rc.owner != p) continue;
          pay[p] += rc.value;
          break;
        case RewardCell::Scope::kAnyPlayer:
          pay[p] += rc.value;
          break;
        case RewardCell::Scope::kReacherOther:
          pay[p] += rc.value;
          pay[1 - p] += rc.other_value;
          break;
      }
      triggered = true;
    }
    if (!triggered) return std::nullopt;
    return pay;
  };

  // Breadth-first enumeration of reachable position states. Payout states are
  // numbered after all position states.
  std::vector<GridPositions> positions;
  std::map<std::pair<Cell, Cell>, StateId> position_ids;
  auto position_id = [&](Cell a, Cell b) {
    auto [it, inserted] = position_ids.try_emplace({a, b}, positions.size());
    if (inserted) positions.push_back({a, b});
    return it->second;
  };

  constexpr std::size_t kJoint = 25;
  // Outcomes referencing payout states by payout index, fixed up afterwards.
  struct RawOutcome {
    bool payout;
    std::size_t id;
    double prob;
  };
  std::vector<std::vector<std::vector<RawOutcome>>> raw;
  std::map<std::vector<double>, std::size_t> payout_index;
  std::vector<std::vector<double>> payout_vectors;

  position_id(def.start_a, def.start_b);
  for (StateId s = 0; s < positions.size(); ++s) {
    const GridPositions pos = positions[s];
    raw.emplace_back(kJoint);
    for (JointIndex j = 0; j < kJoint; ++j) {
      const ActionId aa = j / 5, ab = j % 5;
      for (const Move& m : resolve(pos.a, pos.b, aa, ab)) {
        if (m.prob == 0.0) continue;
        RawOutcome out{};
        out.prob = m.prob;
        if (auto pay = payout_of(m.a, m.b)) {
          auto [it, inserted] = payout_index.try_emplace(*pay, payout_vectors.size());
          if (inserted) payout_vectors.push_back(*pay);
          out.payout = true;
          out.id = it->second;
        } else {
          out.payout = false;
          out.id = position_id(m.a, m.b);
        }
        auto& list = raw[s][j];
        auto same = std::find_if(list.begin(), list.end(),
                                 [&](const RawOutcome& o) { return o.payout == out.payout && o.id == out.id; });
        if (same != list.end())
          same->prob += out.prob;
        else
          list.push_back(out);
      }
    }
  }

  const std::size_t num_positions = positions.size();
  const std::size_t num_states = num_positions + payout_vectors.size();
  GameDefinition g;
  g.name = def.name;
  const std::vector<std::string> labels{"up", "down", "left", "right", "stay"};
  g.action_labels = {labels, labels};
  g.num_states = num_states;
  g.max_stage_steps = def.max_stage_steps;
  g.transitions.resize(num_states * kJoint);
  g.rewards.assign(num_states * kJoint * 2, 0.0);
  g.arrival.assign(num_states * 2, 0.0);
  g.absorbing.assign(num_states, false);
  g.initial.assign(num_states, 0.0);
  g.initial[0] = 1.0;
  for (StateId s = 0; s < num_positions; ++s) {
    g.state_labels.push_back(position_label(positions[s]));
    for (JointIndex j = 0; j < kJoint; ++j)
      for (const RawOutcome& o : raw[s][j])
        g.transitions[s * kJoint + j].push_back({o.payout ? num_positions + o.id : o.id, o.prob});
  }
  for (std::size_t k = 0; k < payout_vectors.size(); ++k) {
    const StateId s = num_positions + k;
    g.state_labels.push_back(payout_label(payout_vectors[k]));
    g.absorbing[s] = true;
    g.arrival[s * 2] = payout_vectors[k][0];
    g.arrival[s * 2 + 1] = payout_vectors[k][1];
  }

  // Mirror symmetry: swap the players and reflect columns.
  Automorphism mirror;
  mirror.players = PlayerPermutation({1, 0});
  mirror.state_map.resize(num_states);
  auto reflect = [&](Cell c) { return Cell{c.row, def.width - 1 - c.col}; };
  for (StateId s = 0; s < num_positions; ++s) {
    auto it = position_ids.find({reflect(positions[s].b), reflect(positions[s].a)});
    if (it == position_ids.end()) throw std::logic_error("grid layout is not mirror symmetric");
    mirror.state_map[s] = it->second;
  }
  for (std::size_t k = 0; k < payout_vectors.size(); ++k) {
    auto it = payout_index.find({payout_vectors[k][1], payout_vectors[k][0]});
    if (it == payout_index.end()) throw std::logic_error("grid payouts are not mirror symmetric");
    mirror.state_map[num_positions + k] = num_positions + it->second;
  }
  mirror.inverse_state_map.resize(num_states);
  for (StateId s = 0; s < num_states; ++s) mirror.inverse_state_map[mirror.state_map[s]] = s;
  const std::vector<ActionId> flip{kUp, kDown, kRight, kLeft, kStay};
  mirror.action_map = {flip, flip};
  g.automorphisms.push_back(std::move(mirror));

  return GameSpec(std::move(g));
}

std::optional<GridPositions> grid_positions(const GameSpec& grid, StateId s) {
  if (s >= grid.num_states() || grid.is_absorbing(s)) return std::nullopt;
  GridPositions pos;
  const std::string label = grid.state_label(s);
  if (std::sscanf(label.c_str(), "A@%d,%d B@%d,%d", &pos.a.row, &pos.a.col, &pos.b.row, &pos.b.col) != 4)
    return std::nullopt;
  return pos;
}

std::optional<StateId> grid_state(const GameSpec& grid, const GridPositions& pos) {
  const std::string label = position_label(pos);
  for (StateId s = 0; s < grid.num_states(); ++s)
    if (grid.state_label(s) == label) return s;
  return std::nullopt;
}

std::string render_grid(const GridWorldDef& def, const GameSpec& grid, StateId s) {
  std::vector<std::string> rows(def.height, std::string(def.width, '.'));
  for (const Cell& w : def.walls) rows[w.row][w.col] = '#';
  for (const RewardCell& rc : def.reward_cells) rows[rc.cell.row][rc.cell.col] = '$';
  if (auto pos = grid_positions(grid, s)) {
    rows[pos->a.row][pos->a.col] = 'A';
    rows[pos->b.row][pos->b.col] = 'B';
  } else {
    return grid.state_label(s) + "\n";
  }
  std::string out;
  for (const auto& r : rows) out += r + "\n";
  return out;
}

// ---------------------------------------------------------------------------
// Cake game
// ---------------------------------------------------------------------------

std::vector<CakeOutcome> cake_outcomes(std::span<const ActionId> profile) {
  const std::size_t n = profile.size();
  require(n >= 2, "the cake game needs at least two players");
  std::size_t n_share = 0, n_rob = 0, n_poison = 0;
  for (ActionId a : profile) {
    require(a <= kPoison, "invalid cake action");
    n_share += a == kShare;
    n_rob += a == kRob;
    n_poison += a == kPoison;
  }
  const double cost = static_cast<double>(n_poison) / static_cast<double>(n - 1);

  if (n_rob == 0) {
    CakeOutcome out{1.0, std::vector<double>(n, 0.0)};
    if (n_share > 0)
      for (std::size_t p = 0; p < n; ++p)
        if (profile[p] == kShare) out.rewards[p] = (1.0 - cost) / static_cast<double>(n_share);
    return {out};
  }
  std::vector<CakeOutcome> outs;
  for (std::size_t p = 0; p < n; ++p) {
    if (profile[p] != kRob) continue;
    CakeOutcome out{1.0 / static_cast<double>(n_rob), std::vector<double>(n, 0.0)};
    out.rewards[p] = 0.5 - cost;
    outs.push_back(std::move(out));
  }
  return outs;
}

std::vector<double> cake_rewards(std::span<const ActionId> profile, Rng& rng) {
  auto outs = cake_outcomes(profile);
  if (outs.size() == 1) return outs.front().rewards;
  std::uniform_int_distribution<std::size_t> pick(0, outs.size() - 1);
  return outs[pick(rng)].rewards;
}

GameSpec build_cake_game(const CakeGameDef& def) {
  const std::size_t n = def.num_players;
  require(n >= 2, "the cake game needs at least two players");
  const std::vector<std::string> labels{"share", "rob", "poison"};
  const JointLayout layout(std::vector<std::size_t>(n, 3));
  const std::size_t joint_count = layout.num_joint();

  PayoutStates payouts(1);
  std::vector<std::vector<Outcome>> decision(joint_count);
  std::vector<double> step_rewards(joint_count * n, 0.0);
  for (JointIndex j = 0; j < joint_count; ++j) {
    const JointAction profile = layout.decode(j);
    const auto outs = cake_outcomes(profile);
    const bool robbed = std::any_of(profile.begin(), profile.end(), [](ActionId a) { return a == kRob; });
    if (!robbed) {
      decision[j] = {Outcome{0, 1.0}};
      std::copy(outs.front().rewards.begin(), outs.front().rewards.end(), step_rewards.begin() + j * n);
      continue;
    }
    for (const CakeOutcome& o : outs) decision[j].push_back({payouts.get(o.rewards), o.probability});
  }

  const std::size_t num_states = payouts.next_id();
  GameDefinition g;
  g.name = n == 3 ? "cake" : "cake" + std::to_string(n);
  g.action_labels.assign(n, labels);
  g.num_states = num_states;
  g.state_labels.push_back("decide");
  for (const auto& pay : payouts.payouts()) g.state_labels.push_back(payout_label(pay));
  g.transitions.resize(num_states * joint_count);
  for (JointIndex j = 0; j < joint_count; ++j) g.transitions[j] = decision[j];
  g.rewards.assign(num_states * joint_count * n, 0.0);
  std::copy(step_rewards.begin(), step_rewards.end(), g.rewards.begin());
  g.arrival.assign(num_states * n, 0.0);
  g.absorbing.assign(num_states, true);
  g.absorbing[0] = false;
  for (std::size_t k = 0; k < payouts.payouts().size(); ++k)
    std::copy(payouts.payouts()[k].begin(), payouts.payouts()[k].end(), g.arrival.begin() + (k + 1) * n);
  g.initial.assign(num_states, 0.0);
  g.initial[0] = 1.0;
  g.max_stage_steps = 1;

  // Payout states permute with the players; everything else is fixed.
  std::vector<PlayerPermutation> perms;
  if (n <= 6) {
    perms = all_permutations(n);
  } else {
    for (std::size_t k = 0; k < n; ++k) perms.push_back(cyclic_permutation(n).power(static_cast<long>(k)));
  }
  for (const PlayerPermutation& psi : perms) {
    Automorphism sym;
    sym.players = psi;
    sym.state_map.resize(num_states);
    sym.state_map[0] = 0;
    for (std::size_t k = 0; k < payouts.payouts().size(); ++k) {
      auto image = payouts.find(permute_vector(psi, payouts.payouts()[k]));
      if (!image) throw std::logic_error("cake payouts are not closed under permutation");
      sym.state_map[k + 1] = *image;
    }
    sym.inverse_state_map.resize(num_states);
    for (StateId s = 0; s < num_states; ++s) sym.inverse_state_map[sym.state_map[s]] = s;
    sym.action_map.assign(n, {kShare, kRob, kPoison});
    g.automorphisms.push_back(std::move(sym));
  }
  return GameSpec(std::move(g));
}

// ---------------------------------------------------------------------------
// Registry
// ---------------------------------------------------------------------------

std::vector<std::string> list_games() {
  return {"ipd", "aipd", "ich", "rps", "grid_pd", "compromise", "coordination", "temptation", "cake"};
}

GameSpec build_game(std::string_view name) {
  if (name == "ipd") return build_matrix_game(MatrixGame::kIPD);
  if (name == "aipd") return build_matrix_game(MatrixGame::kAIPD);
  if (name == "ich") return build_matrix_game(MatrixGame::kICH);
  if (name == "rps") return build_matrix_game(MatrixGame::kRPS);
  if (name == "grid_pd") return build_grid_game(GridGame::kGridPD);
  if (name == "compromise") return build_grid_game(GridGame::kCompromise);
  if (name == "coordination") return build_grid_game(GridGame::kCoordination);
  if (name == "temptation") return build_grid_game(GridGame::kTemptation);
  if (name == "cake") return build_cake_game({3});
  if (name.starts_with("cake")) {
    std::size_t n = 0;
    const auto digits = name.substr(4);
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), n);
    if (ec == std::errc() && ptr == digits.data() + digits.size() && n >= 2) return build_cake_game({n});
  }
  throw LookupError("unknown game '" + std::string(name) + "'");
}

}  // namespace fcl
