#pragma once

#include <chrono>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "shuntbound/graph.hpp"
#include "shuntbound/model.hpp"

namespace shuntbound {

/// A CBS constraint on one agent: a forbidden vertex (location at time t,
/// both rails of a split pair), a forbidden arc (u -> v during t -> t+1), or
/// a bound on the path's completion time (MinEnd: final arrival at or after
/// t; MaxEnd: at or before t). Completion bounds drive the resting-goal
/// split, where single-timestep vertex bans would recur forever.
struct Constraint {
  enum class Kind : uint8_t { Vertex, Arc, MinEnd, MaxEnd };

  int agent = -1;
  Kind kind = Kind::Vertex;
  Loc u = -1;
  Loc v = -1;
  int t = 0;

  bool operator==(const Constraint&) const = default;
};

/// One agent's route from its arrival vertex to its exit. In timed mode the
/// last state sits on the assigned goal vertex at exactly its departure
/// time; in classic mode it is the final arrival at the goal location and
/// the agent rests there afterwards.
struct Path {
  int agent = -1;
  int goal = -1;  // index into Instance::goals
  std::vector<SearchState> states;
  double cost = 0.0;

  int start_time() const { return states.empty() ? 0 : states.front().t; }
  int end_time() const { return states.empty() ? -1 : states.back().t; }
};

struct Conflict {
  enum class Kind : uint8_t { Node, Edge, PairCapacity };

  Kind kind = Kind::Node;
  int a = -1, b = -1;  // a < b
  int t = 0;
  Loc u = -1;  // node/pair: the location; edge: agent a's source
  Loc v = -1;  // edge: agent a's target
};

const char* to_string(Conflict::Kind k);

/// Fast membership view over one agent's constraints.
class ConstraintTable {
 public:
  ConstraintTable(std::span<const Constraint> constraints, int agent);

  bool blocks_vertex(Loc l, int t) const;
  bool blocks_arc(Loc u, Loc v, int t) const;
  /// Latest time the location is forbidden, -1 if never. Classic goal test:
  /// resting at l is safe only strictly after this.
  int last_vertex_time(Loc l) const;
  /// Completion-time window from Min/MaxEnd constraints.
  int min_end() const { return min_end_; }
  int max_end() const { return max_end_; }

 private:
  std::vector<uint64_t> vertices_;  // sorted (loc, t) keys
  std::vector<uint64_t> arcs_;      // sorted (u, v, t) keys
  int min_end_ = 0;
  int max_end_ = std::numeric_limits<int>::max();
};

enum class PlanStatus : uint8_t { Found, Infeasible, Deadline };

struct PlanResult {
  PlanStatus status = PlanStatus::Infeasible;
  Path path;
  int64_t expanded = 0;
};

using Deadline = std::optional<std::chrono::steady_clock::time_point>;

/// Optimal single-agent route to `goal_index` under the given constraints,
/// completing every service task, via A* over the time expansion. Infeasible
/// means the horizon-bounded space is exhausted.
PlanResult plan_single(const Instance& instance, int agent, int goal_index,
                       std::span<const Constraint> constraints, Deadline deadline = {});

/// Admissible lower bound on the remaining cost from `state` to the goal,
/// covering pending service tasks by the cheapest detour through each task's
/// location set.
double admissible_heuristic(const Instance& instance, int agent, const SearchState& state,
                            const GoalVertex& goal);

/// All node / edge / pair-capacity violations between the paths, ordered by
/// (time, agents). Split node pairs count as one capacity unit.
std::vector<Conflict> detect_conflicts(const Instance& instance, std::span<const Path> paths);

struct SolutionReport {
  std::vector<std::string> violations;
  double recomputed_cost = 0.0;

  bool pass() const { return violations.empty(); }
};

/// Full solution check: per-path step legality and cost arithmetic, service
/// completion, arrival/goal compliance, type-correct goal coverage, zero
/// conflicts.
SolutionReport validate_solution(const Instance& instance, std::span<const Path> paths);

}  // namespace shuntbound
