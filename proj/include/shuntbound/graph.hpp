#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "shuntbound/model.hpp"

namespace shuntbound {

/// Chops every track into ceil(length / min_train_length) locations chained
/// left to right and joins the chains at the connected track ends. Throws
/// std::invalid_argument on malformed specs or a disconnected result.
TrackGraph discretize_yard(const YardSpec& spec);

/// Direction-splitting transform. Reversal arcs exist only at reversible
/// locations; arc costs live in the cost model, not the graph.
DirectedYardGraph split_directions(const TrackGraph& g);

/// One search state of one agent. `dir` is -1 when directions mode is off.
/// `done` is the completed-task bitmask; `run` counts consecutive time steps
/// spent at `loc` (saturating at Instance::run_cap), which carries both
/// service-dwell progress and the no-parking wait budget.
struct SearchState {
  Loc loc = 0;
  int8_t dir = -1;
  int32_t t = 0;
  uint32_t done = 0;
  uint8_t run = 1;

  bool operator==(const SearchState&) const = default;
};

struct SearchStateHash {
  size_t operator()(const SearchState& s) const {
    uint64_t k = (uint64_t)(uint32_t)s.loc;
    k = k * 0x9e3779b97f4a7c15ULL + (uint64_t)(uint32_t)(s.dir + 1);
    k = k * 0x9e3779b97f4a7c15ULL + (uint64_t)(uint32_t)s.t;
    k = k * 0x9e3779b97f4a7c15ULL + s.done;
    k = k * 0x9e3779b97f4a7c15ULL + s.run;
    return (size_t)(k ^ (k >> 32));
  }
};

enum class Action : uint8_t { Move = 0, Wait = 1, Reverse = 2 };

struct Successor {
  SearchState state;
  double cost = 0.0;
  Action action = Action::Wait;
};

/// Completed-task mask update on entering `loc` with run length `run`.
uint32_t apply_progress(const Instance& instance, int agent, Loc loc, int run, uint32_t done);

/// Start states at the arrival vertex. Two states when directions mode is on
/// and the agent's arrival direction is unconstrained.
std::vector<SearchState> start_states(const Instance& instance, int agent);

/// Successor states one time step later: moves along permitted arcs, waiting
/// (suppressed at a no-parking location once the wait budget is spent), and
/// reversal where a reversal arc exists. Appends to `out` in deterministic
/// order (moves by target, wait, reverse).
void neighbors(const Instance& instance, int agent, const SearchState& state,
               std::vector<Successor>& out);

/// Distance tables used by heuristics, validation and pruning.
DistanceTables build_distances(const TrackGraph& g, const DirectedYardGraph* dg,
                               const CostModel& costs);

/// Locations reachable from `from` in the undirected graph.
std::vector<char> reachable_locations(const TrackGraph& g, Loc from);

}  // namespace shuntbound
