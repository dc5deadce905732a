#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "fcl/game.hpp"

namespace fcl {

// Two-player matrix games ------------------------------------------------------

enum class MatrixGame { kIPD, kAIPD, kICH, kRPS };

struct MatrixGameDef {
  std::string name;
  std::vector<std::vector<std::string>> action_labels;
  /// payoffs[joint] = reward vector, joint indexed with player 0 most significant.
  std::vector<std::vector<double>> payoffs;
};

MatrixGameDef matrix_game_def(MatrixGame which);
GameSpec build_matrix_game(MatrixGame which);
/// Single-state, one-step stage game from an explicit payoff table.
GameSpec build_matrix_game(const MatrixGameDef& def);

// Two-player grid games --------------------------------------------------------

enum class GridGame { kGridPD, kCompromise, kCoordination, kTemptation };

struct Cell {
  int row = 0;
  int col = 0;
  friend auto operator<=>(const Cell&, const Cell&) = default;
};

struct RewardCell {
  enum class Scope {
    kOwnerOnly,     // only `owner` is paid (and triggers the reset)
    kAnyPlayer,     // whoever reaches it gets `value`
    kReacherOther,  // reacher gets `value`, the other player gets `other_value`
  };
  Cell cell;
  Scope scope = Scope::kAnyPlayer;
  std::size_t owner = 0;
  double value = 0.0;
  double other_value = 0.0;
};

struct GridWorldDef {
  std::string name;
  int width = 0;
  int height = 0;
  std::vector<Cell> walls;
  Cell start_a;
  Cell start_b;
  std::vector<RewardCell> reward_cells;
  double contest_win_prob = 0.5;
  std::size_t max_stage_steps = 30;
};

enum GridAction : ActionId { kUp = 0, kDown = 1, kLeft = 2, kRight = 3, kStay = 4 };

GridWorldDef grid_world_def(GridGame which);
GameSpec build_grid_game(GridGame which);
GameSpec build_grid_game(const GridWorldDef& def);

/// Positions of both players in a non-absorbing grid state.
struct GridPositions {
  Cell a;
  Cell b;
};
/// Decodes a grid state label produced by build_grid_game.
std::optional<GridPositions> grid_positions(const GameSpec& grid, StateId s);
/// State id for the given positions, if reachable.
std::optional<StateId> grid_state(const GameSpec& grid, const GridPositions& pos);
/// ASCII rendering of a grid state for debugging.
std::string render_grid(const GridWorldDef& def, const GameSpec& grid, StateId s);

// N-player cake game -----------------------------------------------------------

enum CakeAction : ActionId { kShare = 0, kRob = 1, kPoison = 2 };

struct CakeGameDef {
  std::size_t num_players = 3;
};

struct CakeOutcome {
  double probability = 0.0;
  std::vector<double> rewards;
};

/// All lottery outcomes of one cake profile.
std::vector<CakeOutcome> cake_outcomes(std::span<const ActionId> profile);
/// Samples the rewards of one cake profile.
std::vector<double> cake_rewards(std::span<const ActionId> profile, Rng& rng);
GameSpec build_cake_game(const CakeGameDef& def);

// Registry -----------------------------------------------------------------------

/// The nine bundled game names.
std::vector<std::string> list_games();
/// Builds a bundled game by name ("cake" is N=3; "cake<N>" selects N).
GameSpec build_game(std::string_view name);

}  // namespace fcl
