#pragma once

#include <span>

#include "shuntbound/planner.hpp"
#include "shuntbound/solver.hpp"

namespace shuntbound {

inline constexpr int kOracleMaxAgents = 3;
inline constexpr int kOracleMaxLocations = 12;
inline constexpr int kOracleMaxHorizon = 12;

/// Exhaustive uniform-cost search over joint states; exact ground truth for
/// tiny instances. Shares only the model/graph modules with the solver.
/// Throws std::invalid_argument when the size guard is violated.
Outcome brute_force(const Instance& instance);

/// Joint-legality check of a set of paths under the oracle's own move rules;
/// definitionally equivalent to detect_conflicts reporting nothing.
bool trajectory_legal(const Instance& instance, std::span<const Path> paths);

}  // namespace shuntbound
