#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>

#include "fcl/game.hpp"

namespace fcl {

/// Malformed game description; the message carries the line number.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Line-oriented game description. '#' starts a comment.
//
//   game <name>
//   players <N>
//   states <S>
//   actions <player> <label>...
//   max_stage_steps <H>
//   initial <state> <probability>
//   absorbing <state>
//   state_label <state> <text...>
//   transition <state> <joint> <next> <probability>
//   reward <state> <joint> <r_0> ... <r_N-1>
//   arrival <state> <r_0> ... <r_N-1>
//   symmetry <psi_0..psi_N-1> | <f(0)..f(S-1)> | <g_0 actions> | ... | <g_N-1 actions>
//
// Joint indices put player 0 in the most significant position.

void write_game(std::ostream& os, const GameSpec& game);
GameSpec read_game(std::istream& is);
GameSpec load_game_file(const std::string& path);

}  // namespace fcl
