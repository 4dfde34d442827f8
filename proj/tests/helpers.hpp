#pragma once

// Tiny hand-rolled yards and agents shared by the test binaries.

#include <string>
#include <vector>

#include "shuntbound/model.hpp"

namespace shuntbound::testing {

// Undirected chain l0 - l1 - ... - l{n-1}, all reversible and parkable.
inline TrackGraph line_graph(int n) {
  TrackGraph g;
  for (int i = 0; i < n; ++i) {
    LocationInfo info;
    info.name = "l" + std::to_string(i);
    g.locations.push_back(info);
  }
  for (Loc i = 0; i + 1 < n; ++i) g.edges.push_back({i, i + 1, Dir::Right, Dir::Left});
  g.rebuild_adjacency();
  return g;
}

inline Agent make_agent(std::string id, int type, Loc arrival, int t = 0) {
  Agent a;
  a.id = std::move(id);
  a.type = type;
  a.arrival_loc = arrival;
  a.arrival_time = t;
  return a;
}

inline GoalVertex make_goal(Loc loc, int time, int type = 0) { return {loc, time, type}; }

// Line-yard instance skeleton; add agents/goals, then call finalize().
inline Instance line_instance(int n, ModeFlags mode, int horizon) {
  Instance inst;
  inst.graph = line_graph(n);
  inst.types = {"unit"};
  inst.mode = mode;
  inst.horizon = horizon;
  return inst;
}

}  // namespace shuntbound::testing
