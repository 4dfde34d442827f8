#pragma once

#include <optional>
#include <string>
#include <vector>

#include "shuntbound/model.hpp"
#include "shuntbound/planner.hpp"

namespace shuntbound {

enum class Status : uint8_t { Optimal, Infeasible, Timeout };

const char* to_string(Status s);

struct SolveStats {
  int64_t high_level_expanded = 0;
  int64_t low_level_expanded = 0;
  int64_t assignments_tried = 0;
  double runtime_ms = 0.0;
};

/// Solver verdict. Optimal carries a conflict-free solution; Infeasible
/// proves no solution exists within the horizon (or, with `decision` set,
/// none within the cost bound); Timeout carries the best valid lower bound.
struct Outcome {
  Status status = Status::Infeasible;
  std::optional<double> cost;
  std::optional<double> lower_bound;
  std::vector<Path> solution;
  bool decision = false;
  int horizon = 0;
  std::string engine = "cbs";
  SolveStats stats;
};

struct SolveConfig {
  std::optional<double> budget_seconds;
  std::optional<double> bound;  // decision problem: is optimal cost <= bound?
};

/// Complete, optimal solver. Classic instances whose composite state space
/// is small enough to enumerate are decided exactly by a joint A* over
/// agent-state tuples (the only tractable way to refute an infeasible one);
/// everything else runs conflict-based search. Matching instances seed one
/// CBS root per type-respecting assignment, lazily in best-first order of
/// optimistic cost; branching resolves the earliest conflict with one
/// constraint per agent, except that occupancy conflicts on a classic agent
/// resting at its goal split on that agent's completion time.
Outcome solve(const Instance& instance, const SolveConfig& config = {});

/// Best-assignment sum of conflict-ignoring optimal path costs; a valid
/// lower bound on the optimal SIC. nullopt when no agent-goal pairing is
/// even individually routable.
std::optional<double> lower_bound(const Instance& instance);

}  // namespace shuntbound
