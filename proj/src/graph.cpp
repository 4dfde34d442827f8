#include "shuntbound/graph.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <stdexcept>

namespace shuntbound {

TrackGraph discretize_yard(const YardSpec& spec) {
  if (spec.min_train_length_m <= 0.0)
    throw std::invalid_argument("min_train_length_m must be positive");

  TrackGraph g;
  std::unordered_map<std::string, int> track_index;
  // first/last location of each track chain
  std::vector<Loc> first_loc, last_loc;

  for (const TrackSpec& t : spec.tracks) {
    if (t.length_m <= 0.0)
      throw std::invalid_argument("track '" + t.id + "' has non-positive length");
    if (track_index.count(t.id)) throw std::invalid_argument("duplicate track id '" + t.id + "'");
    int ti = (int)track_index.size();
    track_index[t.id] = ti;

    int n = std::max(1, (int)std::ceil(t.length_m / spec.min_train_length_m));
    Loc base = (Loc)g.locations.size();
    for (int i = 0; i < n; ++i) {
      LocationInfo info;
      info.name = t.id + ":" + std::to_string(i);
      info.track = ti;
      info.reversible = t.reversible;
      info.no_parking = t.no_parking;
      g.locations.push_back(std::move(info));
      if (i > 0) g.edges.push_back({base + i - 1, base + i, Dir::Right, Dir::Left});
    }
    first_loc.push_back(base);
    last_loc.push_back(base + n - 1);
  }

  for (const ConnectionSpec& c : spec.connections) {
    auto ia = track_index.find(c.track_a);
    auto ib = track_index.find(c.track_b);
    if (ia == track_index.end() || ib == track_index.end())
      throw std::invalid_argument("connection references unknown track");
    Loc u = c.end_a == Dir::Left ? first_loc[ia->second] : last_loc[ia->second];
    Loc v = c.end_b == Dir::Left ? first_loc[ib->second] : last_loc[ib->second];
    if (u == v) throw std::invalid_argument("connection would create a self-loop at '" +
                                            g.locations[u].name + "'");
    g.edges.push_back({u, v, c.end_a, c.end_b});
  }

  // Normalize endpoint order, then drop parallel duplicates.
  for (auto& e : g.edges)
    if (e.u > e.v) {
      std::swap(e.u, e.v);
      std::swap(e.side_u, e.side_v);
    }
  std::sort(g.edges.begin(), g.edges.end(), [](const auto& a, const auto& b) {
    return std::tie(a.u, a.v, a.side_u, a.side_v) < std::tie(b.u, b.v, b.side_u, b.side_v);
  });
  g.edges.erase(std::unique(g.edges.begin(), g.edges.end(),
                            [](const auto& a, const auto& b) { return a.u == b.u && a.v == b.v; }),
                g.edges.end());

  for (const ServicePointSpec& sp : spec.service_points) {
    auto it = track_index.find(sp.track);
    if (it == track_index.end())
      throw std::invalid_argument("service point references unknown track '" + sp.track + "'");
    for (Loc l = 0; l < (Loc)g.locations.size(); ++l) {
      if (g.locations[l].track != it->second) continue;
      auto& kinds = g.locations[l].task_kinds;
      if (!std::count(kinds.begin(), kinds.end(), sp.kind)) kinds.push_back(sp.kind);
    }
  }
  for (auto& info : g.locations) std::sort(info.task_kinds.begin(), info.task_kinds.end());

  g.rebuild_adjacency();
  if (!g.connected()) throw std::invalid_argument("discretized yard is not connected");
  return g;
}

DirectedYardGraph split_directions(const TrackGraph& g) {
  DirectedYardGraph dg;
  dg.n_locations = (int)g.locations.size();
  dg.move_out.assign(g.locations.size() * 2, {});
  dg.reversible.resize(g.locations.size());
  for (Loc l = 0; l < (Loc)g.locations.size(); ++l) dg.reversible[l] = g.locations[l].reversible;

  // Leaving u via its left side means moving leftward, so the traversal
  // departs the left rail; it enters v heading away from the touched side,
  // landing on the rail that points onward.
  auto out_rail = [](Loc l, Dir side) { return DirectedYardGraph::node(l, side); };
  auto in_rail = [](Loc l, Dir side) { return DirectedYardGraph::node(l, opposite(side)); };

  for (const TrackGraph::Edge& e : g.edges) {
    dg.move_out[out_rail(e.u, e.side_u)].push_back(in_rail(e.v, e.side_v));
    dg.move_out[out_rail(e.v, e.side_v)].push_back(in_rail(e.u, e.side_u));
  }
  for (auto& list : dg.move_out) {
    std::sort(list.begin(), list.end());
    list.erase(std::unique(list.begin(), list.end()), list.end());
  }
  return dg;
}

uint32_t apply_progress(const Instance& inst, int agent, Loc loc, int run, uint32_t done) {
  auto tasks = inst.tasks_of(agent);
  for (size_t i = 0; i < tasks.size(); ++i) {
    if (done & (1u << i)) continue;
    if (tasks[i].duration > run) continue;
    if (std::binary_search(tasks[i].locations.begin(), tasks[i].locations.end(), loc))
      done |= (1u << i);
  }
  return done;
}

std::vector<SearchState> start_states(const Instance& inst, int agent) {
  const Agent& a = inst.agents[agent];
  std::vector<SearchState> out;
  auto make = [&](int8_t dir) {
    SearchState s;
    s.loc = a.arrival_loc;
    s.dir = dir;
    s.t = a.arrival_time;
    s.run = 1;
    s.done = apply_progress(inst, agent, s.loc, 1, 0);
    out.push_back(s);
  };
  if (!inst.mode.directions) {
    make(-1);
  } else if (a.arrival_dir) {
    make((int8_t)*a.arrival_dir);
  } else {
    make((int8_t)Dir::Left);
    make((int8_t)Dir::Right);
  }
  return out;
}

void neighbors(const Instance& inst, int agent, const SearchState& state,
               std::vector<Successor>& out) {
  if (state.t >= inst.horizon) return;
  const int next_t = state.t + 1;
  const double wait_cost = inst.wait_cost();

  auto stay_run = [&](const SearchState& s) {
    return (uint8_t)std::min<int>(s.run + 1, inst.run_cap);
  };
  auto push = [&](Loc loc, int8_t dir, uint8_t run, double cost, Action act) {
    SearchState n;
    n.loc = loc;
    n.dir = dir;
    n.t = next_t;
    n.run = run;
    n.done = apply_progress(inst, agent, loc, run, state.done);
    out.push_back({n, cost, act});
  };

  if (inst.mode.directions) {
    const DirectedYardGraph& dg = *inst.dgraph;
    int32_t node = DirectedYardGraph::node(state.loc, (Dir)state.dir);
    for (int32_t m : dg.move_out[node])
      push(DirectedYardGraph::loc_of(m), (int8_t)DirectedYardGraph::dir_of(m), 1,
           inst.costs.move_cost, Action::Move);
  } else {
    for (Loc n : inst.graph.adj[state.loc]) push(n, -1, 1, inst.costs.move_cost, Action::Move);
  }

  // Wait edge; at a no-parking location only while the wait budget lasts.
  bool wait_ok = true;
  if (inst.max_dwell && inst.graph.locations[state.loc].no_parking)
    wait_ok = state.run <= *inst.max_dwell;
  if (wait_ok) push(state.loc, state.dir, stay_run(state), wait_cost, Action::Wait);

  // Reversal keeps the location, so it counts toward the dwell.
  if (inst.mode.directions && inst.dgraph->reversible[state.loc])
    push(state.loc, (int8_t)opposite((Dir)state.dir), stay_run(state), inst.costs.reversal_cost,
         Action::Reverse);
}

std::vector<char> reachable_locations(const TrackGraph& g, Loc from) {
  std::vector<char> seen(g.locations.size(), 0);
  std::queue<Loc> q;
  q.push(from);
  seen[from] = 1;
  while (!q.empty()) {
    Loc l = q.front();
    q.pop();
    for (Loc n : g.adj[l])
      if (!seen[n]) {
        seen[n] = 1;
        q.push(n);
      }
  }
  return seen;
}

namespace {

// Uniform BFS layer fill for hop counts.
void bfs_hops(const std::vector<std::vector<Loc>>& adj, Loc src, std::vector<int>& out) {
  out.assign(adj.size(), -1);
  std::queue<Loc> q;
  out[src] = 0;
  q.push(src);
  while (!q.empty()) {
    Loc l = q.front();
    q.pop();
    for (Loc n : adj[l])
      if (out[n] < 0) {
        out[n] = out[l] + 1;
        q.push(n);
      }
  }
}

// Dijkstra over directional nodes; movement and reversal arcs carry the
// given weights, every arc is one time step.
void dijkstra_dnodes(const DirectedYardGraph& dg, int32_t src, double move_w, double rev_w,
                     std::vector<double>& cost_out, std::vector<int>& step_out) {
  const size_t n = dg.move_out.size();
  cost_out.assign(n, -1.0);
  step_out.assign(n, -1);
  using Item = std::pair<double, int32_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<Item>> pq;
  std::vector<double> best(n, std::numeric_limits<double>::infinity());
  best[src] = 0.0;
  pq.push({0.0, src});
  while (!pq.empty()) {
    auto [c, node] = pq.top();
    pq.pop();
    if (c > best[node]) continue;
    auto relax = [&](int32_t m, double w) {
      if (c + w < best[m]) {
        best[m] = c + w;
        pq.push({c + w, m});
      }
    };
    for (int32_t m : dg.move_out[node]) relax(m, move_w);
    Loc l = DirectedYardGraph::loc_of(node);
    if (dg.reversible[l])
      relax(DirectedYardGraph::node(l, opposite(DirectedYardGraph::dir_of(node))), rev_w);
  }
  for (size_t i = 0; i < n; ++i)
    if (best[i] < std::numeric_limits<double>::infinity()) cost_out[i] = best[i];

  // unit-step variant for time bounds
  std::vector<int> steps(n, -1);
  std::queue<int32_t> q;
  steps[src] = 0;
  q.push(src);
  while (!q.empty()) {
    int32_t node = q.front();
    q.pop();
    auto relax = [&](int32_t m) {
      if (steps[m] < 0) {
        steps[m] = steps[node] + 1;
        q.push(m);
      }
    };
    for (int32_t m : dg.move_out[node]) relax(m);
    Loc l = DirectedYardGraph::loc_of(node);
    if (dg.reversible[l]) relax(DirectedYardGraph::node(l, opposite(DirectedYardGraph::dir_of(node))));
  }
  step_out = std::move(steps);
}

}  // namespace

DistanceTables build_distances(const TrackGraph& g, const DirectedYardGraph* dg,
                               const CostModel& costs) {
  DistanceTables t;
  t.loc_hops.resize(g.locations.size());
  for (Loc l = 0; l < (Loc)g.locations.size(); ++l) bfs_hops(g.adj, l, t.loc_hops[l]);

  if (dg) {
    const size_t n = dg->move_out.size();
    t.dnode_cost.resize(n);
    t.dnode_steps.resize(n);
    for (size_t src = 0; src < n; ++src)
      dijkstra_dnodes(*dg, (int32_t)src, costs.move_cost, costs.reversal_cost, t.dnode_cost[src],
                      t.dnode_steps[src]);
  }
  return t;
}

}  // namespace shuntbound
