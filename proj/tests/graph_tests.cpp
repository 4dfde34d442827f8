#include <doctest.h>

#include <algorithm>

#include "helpers.hpp"
#include "shuntbound/graph.hpp"

using namespace shuntbound;
using namespace shuntbound::testing;

namespace {

bool has_arc(const DirectedYardGraph& dg, int32_t from, int32_t to) {
  const auto& out = dg.move_out[from];
  return std::find(out.begin(), out.end(), to) != out.end();
}

std::vector<Successor> succ(const Instance& inst, int agent, const SearchState& s) {
  std::vector<Successor> out;
  neighbors(inst, agent, s, out);
  return out;
}

}  // namespace

TEST_CASE("split_directions keeps the direction of motion along a chain") {
  TrackGraph g = line_graph(3);
  DirectedYardGraph dg = split_directions(g);

  auto R = [](Loc l) { return DirectedYardGraph::node(l, Dir::Right); };
  auto L = [](Loc l) { return DirectedYardGraph::node(l, Dir::Left); };

  // Rightward traversal stays on the right-facing rail, leftward on the left.
  CHECK(has_arc(dg, R(0), R(1)));
  CHECK(has_arc(dg, R(1), R(2)));
  CHECK(has_arc(dg, L(2), L(1)));
  CHECK(has_arc(dg, L(1), L(0)));
  // No crossing over without a reversal.
  CHECK(!has_arc(dg, R(0), L(1)));
  CHECK(!has_arc(dg, L(1), R(0)));
  CHECK(!has_arc(dg, R(2), R(1)));
  CHECK(dg.reversible[0]);
}

TEST_CASE("split_directions on a branching joint") {
  // l0 -right- l1, plus l2 attached to l1's right side as well: leaving l1
  // rightward may continue to either neighbor on that side.
  TrackGraph g = line_graph(2);
  LocationInfo extra;
  extra.name = "l2";
  g.locations.push_back(extra);
  g.edges.push_back({1, 2, Dir::Right, Dir::Left});
  g.rebuild_adjacency();
  DirectedYardGraph dg = split_directions(g);

  auto R = [](Loc l) { return DirectedYardGraph::node(l, Dir::Right); };
  CHECK(has_arc(dg, R(0), R(1)));
  CHECK(has_arc(dg, R(1), R(2)));
  // Entering l1 from l2's side means moving leftward.
  CHECK(has_arc(dg, DirectedYardGraph::node(2, Dir::Left), DirectedYardGraph::node(1, Dir::Left)));
}

TEST_CASE("start_states honor the arrival direction") {
  ModeFlags mode;
  mode.directions = true;
  Instance inst = line_instance(3, mode, 6);
  inst.agents.push_back(make_agent("u0", 0, 1, 2));
  inst.goals.push_back(make_goal(2, -1));
  inst.finalize();

  auto states = start_states(inst, 0);
  REQUIRE(states.size() == 2);  // unconstrained: either rail
  for (const auto& s : states) {
    CHECK(s.loc == 1);
    CHECK(s.t == 2);
    CHECK(s.run == 1);
    CHECK(s.done == 0);
  }
  CHECK(states[0].dir != states[1].dir);

  inst.agents[0].arrival_dir = Dir::Left;
  auto pinned = start_states(inst, 0);
  REQUIRE(pinned.size() == 1);
  CHECK(pinned[0].dir == (int8_t)Dir::Left);

  inst.mode.directions = false;
  inst.finalize();
  auto flat = start_states(inst, 0);
  REQUIRE(flat.size() == 1);
  CHECK(flat[0].dir == -1);
}

TEST_CASE("neighbors: moves, wait, reversal, and the horizon wall") {
  ModeFlags mode;
  mode.directions = true;
  Instance inst = line_instance(3, mode, 4);
  inst.costs.reversal_cost = 2.0;
  inst.agents.push_back(make_agent("u0", 0, 1));
  inst.goals.push_back(make_goal(2, -1));
  inst.finalize();

  SearchState s;
  s.loc = 1;
  s.dir = (int8_t)Dir::Right;
  s.t = 0;
  auto out = succ(inst, 0, s);
  REQUIRE(out.size() == 3);  // move to l2, wait, reverse
  CHECK(out[0].action == Action::Move);
  CHECK(out[0].state.loc == 2);
  CHECK(out[0].state.dir == (int8_t)Dir::Right);
  CHECK(out[0].state.run == 1);
  CHECK(out[0].cost == 1.0);
  CHECK(out[1].action == Action::Wait);
  CHECK(out[1].state.loc == 1);
  CHECK(out[1].cost == 1.0);  // classic default wait
  CHECK(out[2].action == Action::Reverse);
  CHECK(out[2].state.loc == 1);
  CHECK(out[2].state.dir == (int8_t)Dir::Left);
  CHECK(out[2].cost == 2.0);

  // Facing right from l2 there is no move arc; only wait and reverse remain.
  SearchState edge = s;
  edge.loc = 2;
  auto wall = succ(inst, 0, edge);
  REQUIRE(wall.size() == 2);
  CHECK(wall[0].action == Action::Wait);
  CHECK(wall[1].action == Action::Reverse);

  // At the horizon, nothing.
  SearchState late = s;
  late.t = 4;
  CHECK(succ(inst, 0, late).empty());

  // Non-reversible location loses its reversal arc.
  inst.graph.locations[1].reversible = false;
  inst.finalize();
  CHECK(succ(inst, 0, s).size() == 2);
}

TEST_CASE("neighbors: wait cost defaults and flat-graph moves") {
  ModeFlags mode;  // classic, no directions
  Instance inst = line_instance(3, mode, 4);
  inst.agents.push_back(make_agent("u0", 0, 1));
  inst.goals.push_back(make_goal(2, -1));
  inst.finalize();

  SearchState s;
  s.loc = 1;
  auto out = succ(inst, 0, s);
  REQUIRE(out.size() == 3);  // moves to l0, l2 sorted by target, then wait
  CHECK(out[0].state.loc == 0);
  CHECK(out[1].state.loc == 2);
  CHECK(out[2].action == Action::Wait);
  CHECK(out[2].cost == 1.0);  // classic default wait

  inst.mode.timed = true;
  inst.mode.matching = true;
  inst.goals[0].time = 4;
  inst.finalize();
  auto timed = succ(inst, 0, s);
  CHECK(timed[2].cost == 0.0);  // timed default wait
}

TEST_CASE("max_dwell suppresses waiting only past the budget, only at no-parking") {
  ModeFlags mode;
  Instance inst = line_instance(3, mode, 8);
  inst.graph.locations[1].no_parking = true;
  inst.max_dwell = 2;
  inst.agents.push_back(make_agent("u0", 0, 1));
  inst.goals.push_back(make_goal(2, -1));
  inst.finalize();

  auto wait_allowed = [&](Loc l, int run) {
    SearchState s;
    s.loc = l;
    s.run = (uint8_t)run;
    auto out = succ(inst, 0, s);
    return std::any_of(out.begin(), out.end(),
                       [](const Successor& x) { return x.action == Action::Wait; });
  };
  CHECK(wait_allowed(1, 1));
  CHECK(wait_allowed(1, 2));
  CHECK(!wait_allowed(1, 3));  // budget spent
  CHECK(wait_allowed(0, 3));   // parkable location: no budget
}

TEST_CASE("apply_progress completes a task when the dwell suffices on entry") {
  ModeFlags mode;
  mode.services = true;
  Instance inst = line_instance(3, mode, 8);
  inst.graph.locations[1].task_kinds = {"clean", "fuel"};
  Agent a = make_agent("u0", 0, 0);
  a.fixed_goal = 0;
  ServiceTask t0{"s0", "clean", {1}, 2};
  ServiceTask t1{"s1", "fuel", {1, 2}, 1};
  a.tasks = {t0, t1};
  inst.agents.push_back(a);
  inst.goals.push_back(make_goal(2, -1));
  inst.finalize();

  CHECK(apply_progress(inst, 0, 1, 1, 0) == 0b10);        // fuel done instantly
  CHECK(apply_progress(inst, 0, 1, 2, 0) == 0b11);        // second step completes clean
  CHECK(apply_progress(inst, 0, 1, 2, 0b10) == 0b11);     // mask accumulates
  CHECK(apply_progress(inst, 0, 0, 5, 0) == 0);           // wrong location
  CHECK(apply_progress(inst, 0, 2, 1, 0) == 0b10);        // fuel offered at l2 too
  CHECK(apply_progress(inst, 0, 2, 1, 0b11) == 0b11);     // already complete
}

TEST_CASE("run length saturates at run_cap and resets on moves") {
  ModeFlags mode;
  mode.services = true;
  Instance inst = line_instance(3, mode, 8);
  inst.graph.locations[1].task_kinds = {"clean"};
  Agent a = make_agent("u0", 0, 0);
  a.fixed_goal = 0;
  a.tasks = {{"s0", "clean", {1}, 3}};
  inst.agents.push_back(a);
  inst.goals.push_back(make_goal(2, -1));
  inst.finalize();
  REQUIRE(inst.run_cap == 3);

  SearchState s;
  s.loc = 1;
  s.run = 3;
  auto out = succ(inst, 0, s);
  for (const auto& x : out) {
    if (x.action == Action::Wait) CHECK(x.state.run == 3);  // saturated
    if (x.action == Action::Move) CHECK(x.state.run == 1);  // fresh arrival
  }
}

TEST_CASE("distance tables on a line with a dead end") {
  ModeFlags mode;
  mode.directions = true;
  Instance inst = line_instance(3, mode, 8);
  inst.costs.reversal_cost = 5.0;
  inst.agents.push_back(make_agent("u0", 0, 0));
  inst.goals.push_back(make_goal(2, -1));
  inst.finalize();

  CHECK(inst.dist.loc_hops[0][2] == 2);
  CHECK(inst.dist.loc_hops[2][0] == 2);
  CHECK(inst.dist.loc_hops[1][1] == 0);

  auto R = [](Loc l) { return DirectedYardGraph::node(l, Dir::Right); };
  auto L = [](Loc l) { return DirectedYardGraph::node(l, Dir::Left); };
  // Facing the wrong way costs one reversal before the moves.
  CHECK(inst.dist.dnode_cost[R(0)][R(2)] == 2.0);
  CHECK(inst.dist.dnode_cost[L(0)][R(2)] == 7.0);
  CHECK(inst.dist.dnode_steps[L(0)][R(2)] == 3);  // reverse, move, move
  CHECK(inst.dist.dnode_cost[R(0)][R(0)] == 0.0);
}

TEST_CASE("reachable_locations walks the undirected graph") {
  TrackGraph g = line_graph(4);
  auto seen = reachable_locations(g, 1);
  CHECK(std::count(seen.begin(), seen.end(), 1) == 4);
}
