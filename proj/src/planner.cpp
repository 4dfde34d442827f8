#include "shuntbound/planner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <sstream>
#include <unordered_map>

namespace shuntbound {

const char* to_string(Conflict::Kind k) {
  switch (k) {
    case Conflict::Kind::Node: return "node";
    case Conflict::Kind::Edge: return "edge";
    case Conflict::Kind::PairCapacity: return "pair";
  }
  return "?";
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

uint64_t vertex_key(Loc l, int t) { return ((uint64_t)(uint32_t)l << 32) | (uint32_t)t; }
uint64_t arc_key(Loc u, Loc v, int t) {
  return ((uint64_t)(uint32_t)u << 42) | ((uint64_t)(uint32_t)v << 21) | (uint32_t)t;
}

}  // namespace

ConstraintTable::ConstraintTable(std::span<const Constraint> constraints, int agent) {
  for (const Constraint& c : constraints) {
    if (c.agent != agent) continue;
    switch (c.kind) {
      case Constraint::Kind::Vertex: vertices_.push_back(vertex_key(c.u, c.t)); break;
      case Constraint::Kind::Arc: arcs_.push_back(arc_key(c.u, c.v, c.t)); break;
      case Constraint::Kind::MinEnd: min_end_ = std::max(min_end_, c.t); break;
      case Constraint::Kind::MaxEnd: max_end_ = std::min(max_end_, c.t); break;
    }
  }
  std::sort(vertices_.begin(), vertices_.end());
  std::sort(arcs_.begin(), arcs_.end());
}

bool ConstraintTable::blocks_vertex(Loc l, int t) const {
  return std::binary_search(vertices_.begin(), vertices_.end(), vertex_key(l, t));
}

bool ConstraintTable::blocks_arc(Loc u, Loc v, int t) const {
  return std::binary_search(arcs_.begin(), arcs_.end(), arc_key(u, v, t));
}

int ConstraintTable::last_vertex_time(Loc l) const {
  auto lo = std::lower_bound(vertices_.begin(), vertices_.end(), vertex_key(l, 0));
  auto hi = std::lower_bound(vertices_.begin(), vertices_.end(), vertex_key(l + 1, 0));
  if (lo == hi) return -1;
  return (int)(uint32_t)(*(hi - 1) & 0xffffffffu);
}

// ---------------------------------------------------------------------------
// Distance lookups shared by the heuristic.

namespace {

double state_to_loc_cost(const Instance& inst, const SearchState& s, Loc target) {
  if (inst.mode.directions) {
    int32_t from = DirectedYardGraph::node(s.loc, (Dir)s.dir);
    double best = kInf;
    for (int d = 0; d < 2; ++d) {
      double c = inst.dist.dnode_cost[from][DirectedYardGraph::node(target, (Dir)d)];
      if (c >= 0.0 && c < best) best = c;
    }
    return best;
  }
  int hops = inst.dist.loc_hops[s.loc][target];
  return hops < 0 ? kInf : hops * inst.costs.move_cost;
}

int state_to_loc_steps(const Instance& inst, const SearchState& s, Loc target) {
  if (inst.mode.directions) {
    int32_t from = DirectedYardGraph::node(s.loc, (Dir)s.dir);
    int best = -1;
    for (int d = 0; d < 2; ++d) {
      int k = inst.dist.dnode_steps[from][DirectedYardGraph::node(target, (Dir)d)];
      if (k >= 0 && (best < 0 || k < best)) best = k;
    }
    return best;
  }
  return inst.dist.loc_hops[s.loc][target];
}

double loc_to_loc_cost(const Instance& inst, Loc from, Loc target) {
  if (inst.mode.directions) {
    double best = kInf;
    for (int d1 = 0; d1 < 2; ++d1)
      for (int d2 = 0; d2 < 2; ++d2) {
        double c = inst.dist.dnode_cost[DirectedYardGraph::node(from, (Dir)d1)]
                                       [DirectedYardGraph::node(target, (Dir)d2)];
        if (c >= 0.0 && c < best) best = c;
      }
    return best;
  }
  int hops = inst.dist.loc_hops[from][target];
  return hops < 0 ? kInf : hops * inst.costs.move_cost;
}

int loc_to_loc_steps(const Instance& inst, Loc from, Loc target) {
  if (inst.mode.directions) {
    int best = -1;
    for (int d1 = 0; d1 < 2; ++d1)
      for (int d2 = 0; d2 < 2; ++d2) {
        int k = inst.dist.dnode_steps[DirectedYardGraph::node(from, (Dir)d1)]
                                     [DirectedYardGraph::node(target, (Dir)d2)];
        if (k >= 0 && (best < 0 || k < best)) best = k;
      }
    return best;
  }
  return inst.dist.loc_hops[from][target];
}

// Cheapest way to spend one extra step in place.
double min_stay_cost(const Instance& inst, Loc l) {
  double c = inst.wait_cost();
  if (inst.mode.directions && inst.dgraph->reversible[l])
    c = std::min(c, inst.costs.reversal_cost);
  return c;
}

}  // namespace

double admissible_heuristic(const Instance& inst, int agent, const SearchState& state,
                            const GoalVertex& goal) {
  double h = state_to_loc_cost(inst, state, goal.location);
  int steps = state_to_loc_steps(inst, state, goal.location);
  if (std::isinf(h) || steps < 0) return kInf;
  int max_steps = steps;

  auto tasks = inst.tasks_of(agent);
  for (size_t i = 0; i < tasks.size(); ++i) {
    if (state.done & (1u << i)) continue;
    const ServiceTask& task = tasks[i];
    double best_cost = kInf;
    int best_steps = -1;
    for (Loc l : task.locations) {
      double via;
      int via_steps;
      double out = loc_to_loc_cost(inst, l, goal.location);
      int out_steps = loc_to_loc_steps(inst, l, goal.location);
      if (std::isinf(out) || out_steps < 0) continue;
      if (l == state.loc) {
        int stay = std::max(0, task.duration - state.run);
        via = stay * min_stay_cost(inst, l) + out;
        via_steps = stay + out_steps;
      } else {
        double in = state_to_loc_cost(inst, state, l);
        int in_steps = state_to_loc_steps(inst, state, l);
        if (std::isinf(in) || in_steps < 0) continue;
        via = in + (task.duration - 1) * min_stay_cost(inst, l) + out;
        via_steps = in_steps + (task.duration - 1) + out_steps;
      }
      if (via < best_cost) best_cost = via;
      if (best_steps < 0 || via_steps < best_steps) best_steps = via_steps;
    }
    if (std::isinf(best_cost) || best_steps < 0) return kInf;
    h = std::max(h, best_cost);
    max_steps = std::max(max_steps, best_steps);
  }

  int bound = inst.mode.timed ? goal.time : inst.horizon;
  if (state.t + max_steps > bound) return kInf;
  return h;
}

PlanResult plan_single(const Instance& inst, int agent, int goal_index,
                       std::span<const Constraint> constraints, Deadline deadline) {
  PlanResult res;
  const GoalVertex& goal = inst.goals[goal_index];
  const Agent& a = inst.agents[agent];
  if (goal.type != a.type) return res;
  if (inst.mode.timed && a.arrival_time > goal.time) return res;

  ConstraintTable ct(constraints, agent);
  const uint32_t full = (uint32_t)((1ull << inst.tasks_of(agent).size()) - 1ull);
  const bool timed = inst.mode.timed;

  struct Node {
    SearchState s;
    int parent;
    double g;
  };
  std::vector<Node> arena;
  std::unordered_map<SearchState, std::pair<double, int>, SearchStateHash> best;

  struct QItem {
    double f;
    double g;
    uint64_t seq;
    int idx;
    bool operator>(const QItem& o) const {
      if (f != o.f) return f > o.f;
      if (g != o.g) return g < o.g;  // deeper first
      return seq > o.seq;
    }
  };
  std::priority_queue<QItem, std::vector<QItem>, std::greater<QItem>> open;
  uint64_t seq = 0;

  auto is_goal = [&](const SearchState& s) {
    if (s.loc != goal.location || (s.done & full) != full) return false;
    if (s.t < ct.min_end() || s.t > ct.max_end()) return false;
    if (timed) return s.t == goal.time;
    return s.t > ct.last_vertex_time(goal.location);
  };

  for (const SearchState& s0 : start_states(inst, agent)) {
    if (ct.blocks_vertex(s0.loc, s0.t)) continue;
    double h = admissible_heuristic(inst, agent, s0, goal);
    if (std::isinf(h)) continue;
    arena.push_back({s0, -1, 0.0});
    best[s0] = {0.0, (int)arena.size() - 1};
    open.push({h, 0.0, seq++, (int)arena.size() - 1});
  }

  std::vector<Successor> succ;
  int64_t pops = 0;
  while (!open.empty()) {
    QItem top = open.top();
    open.pop();
    if (deadline && (++pops & 0x3ff) == 0 && std::chrono::steady_clock::now() > *deadline) {
      res.status = PlanStatus::Deadline;
      return res;
    }
    SearchState cur = arena[top.idx].s;
    auto bit = best.find(cur);
    if (bit != best.end() && top.g > bit->second.first) continue;  // stale entry

    if (is_goal(cur)) {
      res.status = PlanStatus::Found;
      res.path.agent = agent;
      res.path.goal = goal_index;
      res.path.cost = top.g;
      for (int i = top.idx; i >= 0; i = arena[i].parent) res.path.states.push_back(arena[i].s);
      std::reverse(res.path.states.begin(), res.path.states.end());
      return res;
    }

    ++res.expanded;
    succ.clear();
    neighbors(inst, agent, cur, succ);
    for (const Successor& sc : succ) {
      if (timed && sc.state.t > goal.time) continue;
      if (sc.state.t > ct.max_end()) continue;  // the path must already be over
      if (ct.blocks_vertex(sc.state.loc, sc.state.t)) continue;
      if (sc.state.loc != cur.loc && ct.blocks_arc(cur.loc, sc.state.loc, cur.t)) continue;
      double g2 = top.g + sc.cost;
      auto it = best.find(sc.state);
      if (it != best.end() && g2 >= it->second.first) continue;
      double h = admissible_heuristic(inst, agent, sc.state, goal);
      if (std::isinf(h)) continue;
      arena.push_back({sc.state, top.idx, g2});
      best[sc.state] = {g2, (int)arena.size() - 1};
      open.push({g2 + h, g2, seq++, (int)arena.size() - 1});
    }
  }
  res.status = PlanStatus::Infeasible;
  return res;
}

// ---------------------------------------------------------------------------
// Conflicts.

namespace {

// Projected occupancy of one path at time t; nullopt when absent (timed
// agents exist only inside their arrival..departure window).
std::optional<std::pair<Loc, int8_t>> occupied_at(const Instance& inst, const Path& p, int t) {
  if (p.states.empty() || t < p.start_time()) return std::nullopt;
  if (t <= p.end_time()) {
    const SearchState& s = p.states[t - p.start_time()];
    return std::make_pair(s.loc, s.dir);
  }
  if (inst.mode.timed) return std::nullopt;
  const SearchState& s = p.states.back();  // rests at its goal
  return std::make_pair(s.loc, s.dir);
}

// The move departing at time t, if any.
std::optional<std::pair<Loc, Loc>> arc_at(const Path& p, int t) {
  if (p.states.empty() || t < p.start_time() || t >= p.end_time()) return std::nullopt;
  size_t k = t - p.start_time();
  return std::make_pair(p.states[k].loc, p.states[k + 1].loc);
}

}  // namespace

std::vector<Conflict> detect_conflicts(const Instance& inst, std::span<const Path> paths) {
  std::vector<Conflict> out;
  int t_max = 0;
  for (const Path& p : paths) t_max = std::max(t_max, p.end_time());

  for (int t = 0; t <= t_max; ++t) {
    for (size_t i = 0; i < paths.size(); ++i) {
      auto oi = occupied_at(inst, paths[i], t);
      auto mi = arc_at(paths[i], t);
      if (!oi && !mi) continue;
      for (size_t j = i + 1; j < paths.size(); ++j) {
        auto oj = occupied_at(inst, paths[j], t);
        if (oi && oj && oi->first == oj->first) {
          Conflict c;
          c.kind = inst.mode.directions && oi->second != oj->second
                       ? Conflict::Kind::PairCapacity
                       : Conflict::Kind::Node;
          c.a = paths[i].agent;
          c.b = paths[j].agent;
          c.t = t;
          c.u = oi->first;
          out.push_back(c);
        }
        auto mj = arc_at(paths[j], t);
        if (mi && mj && mi->first != mi->second && mi->first == mj->second &&
            mi->second == mj->first) {
          Conflict c;
          c.kind = Conflict::Kind::Edge;
          c.a = paths[i].agent;
          c.b = paths[j].agent;
          c.t = t;
          c.u = mi->first;
          c.v = mi->second;
          out.push_back(c);
        }
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Validation.

SolutionReport validate_solution(const Instance& inst, std::span<const Path> paths) {
  SolutionReport rep;
  auto fail = [&](const std::string& m) { rep.violations.push_back(m); };
  auto lname = [&](Loc l) { return inst.graph.locations[l].name; };

  if (paths.size() != inst.agents.size()) {
    fail("expected " + std::to_string(inst.agents.size()) + " paths, got " +
         std::to_string(paths.size()));
    return rep;
  }

  std::vector<int> goal_used(inst.goals.size(), 0);
  std::vector<char> agent_seen(inst.agents.size(), 0);
  std::vector<Successor> succ;

  for (const Path& p : paths) {
    if (p.agent < 0 || p.agent >= (int)inst.agents.size()) {
      fail("path references unknown agent " + std::to_string(p.agent));
      continue;
    }
    const Agent& a = inst.agents[p.agent];
    if (agent_seen[p.agent]++) {
      fail("agent " + a.id + " has more than one path");
      continue;
    }
    if (p.goal < 0 || p.goal >= (int)inst.goals.size()) {
      fail("agent " + a.id + ": goal index out of range");
      continue;
    }
    ++goal_used[p.goal];
    const GoalVertex& g = inst.goals[p.goal];
    if (g.type != a.type)
      fail("agent " + a.id + ": type does not match its goal vertex");
    if (!inst.mode.matching && a.fixed_goal >= 0 && p.goal != a.fixed_goal)
      fail("agent " + a.id + ": assigned to a goal other than its fixed one");
    if (p.states.empty()) {
      fail("agent " + a.id + ": empty path");
      continue;
    }

    // Recompute the trajectory from the arrival vertex; run/done in the
    // input are untrusted.
    const SearchState& front = p.states.front();
    SearchState cur;
    bool started = false;
    for (const SearchState& s0 : start_states(inst, p.agent))
      if (s0.loc == front.loc && s0.dir == front.dir && s0.t == front.t) {
        cur = s0;
        started = true;
        break;
      }
    if (!started) {
      fail("agent " + a.id + ": path does not start at its arrival vertex");
      continue;
    }

    double cost = 0.0;
    bool legal = true;
    for (size_t k = 1; k < p.states.size() && legal; ++k) {
      const SearchState& want = p.states[k];
      if (want.t != cur.t + 1) {
        fail("agent " + a.id + ": time step " + std::to_string(k) + " is not +1");
        legal = false;
        break;
      }
      succ.clear();
      neighbors(inst, p.agent, cur, succ);
      const Successor* hit = nullptr;
      for (const Successor& sc : succ)
        if (sc.state.loc == want.loc && sc.state.dir == want.dir) {
          hit = &sc;
          break;
        }
      if (!hit) {
        fail("agent " + a.id + ": illegal step " + lname(cur.loc) + " -> " + lname(want.loc) +
             " at t=" + std::to_string(cur.t));
        legal = false;
        break;
      }
      cost += hit->cost;
      cur = hit->state;
    }
    if (!legal) continue;

    const uint32_t full = (uint32_t)((1ull << inst.tasks_of(p.agent).size()) - 1ull);
    if ((cur.done & full) != full)
      fail("agent " + a.id + ": unfinished service tasks");
    if (cur.loc != g.location)
      fail("agent " + a.id + ": ends at " + lname(cur.loc) + ", goal is " + lname(g.location));
    if (inst.mode.timed && cur.t != g.time)
      fail("agent " + a.id + ": ends at t=" + std::to_string(cur.t) + ", departure is t=" +
           std::to_string(g.time));
    if (cur.t > inst.horizon)
      fail("agent " + a.id + ": path exceeds the horizon");
    if (std::abs(cost - p.cost) > 1e-9)
      fail("agent " + a.id + ": declared cost " + std::to_string(p.cost) +
           " but the steps cost " + std::to_string(cost));
    rep.recomputed_cost += cost;
  }

  for (size_t gi = 0; gi < goal_used.size(); ++gi)
    if (goal_used[gi] != 1)
      fail("goal vertex " + std::to_string(gi) + " is used " + std::to_string(goal_used[gi]) +
           " times");

  for (const Conflict& c : detect_conflicts(inst, paths)) {
    std::ostringstream os;
    os << to_string(c.kind) << " conflict between agents " << inst.agents[c.a].id << " and "
       << inst.agents[c.b].id << " at t=" << c.t << " (" << lname(c.u);
    if (c.kind == Conflict::Kind::Edge) os << " -> " << lname(c.v);
    os << ")";
    fail(os.str());
  }
  return rep;
}

}  // namespace shuntbound
