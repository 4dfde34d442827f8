#include "shuntbound/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <queue>
#include <string>
#include <unordered_map>
#include <unordered_set>

#include "shuntbound/assignment.hpp"

namespace shuntbound {

const char* to_string(Status s) {
  switch (s) {
    case Status::Optimal: return "optimal";
    case Status::Infeasible: return "infeasible";
    case Status::Timeout: return "timeout";
  }
  return "?";
}

namespace {

// High-level search node. Non-root nodes store only the one re-routed path
// and the constraints added relative to the parent; the rest is
// reconstructed by walking the parent chain.
struct HLNode {
  double cost = 0.0;
  int parent = -1;
  bool is_root = false;
  std::vector<Constraint> added;
  Path replanned;
  std::vector<int> assignment;   // roots only
  std::vector<Path> root_paths;  // roots only
};

struct QItem {
  double cost;
  uint64_t seq;
  int idx;
  bool operator>(const QItem& o) const {
    if (cost != o.cost) return cost > o.cost;
    return seq > o.seq;
  }
};

// ---------------------------------------------------------------------------
// Exact joint search for compact classic instances.
//
// CBS can refute an infeasible classic instance only by pushing the whole
// frontier past every reachable cost, and with full-price waits that means
// enumerating combinatorially many equal-cost wait placements — hopeless
// even on five locations with three mutually blocking agents. When the
// composite state space is small enough to enumerate outright, an A* over
// tuples of agent states decides the instance exactly instead; larger
// instances keep the CBS route.

// Composite of every agent's state at one shared time step. An agent is
// absent before its arrival and frozen once parked (final arrival
// committed); both are normalized so equivalent futures share one key.
struct JointNode {
  std::vector<SearchState> ss;
  uint32_t arrived = 0;
  uint32_t parked = 0;
  int t = 0;
  int parent = -1;
  double g = 0.0;
};

std::string joint_key(const JointNode& nd) {
  std::string k;
  k.reserve(12 + nd.ss.size() * 10);
  auto put32 = [&](uint32_t v) {
    for (int b = 0; b < 32; b += 8) k.push_back((char)(v >> b));
  };
  put32((uint32_t)nd.t);
  put32(nd.arrived);
  put32(nd.parked);
  for (const SearchState& s : nd.ss) {
    put32((uint32_t)(int32_t)s.loc);
    put32(s.done);
    k.push_back((char)s.dir);
    k.push_back((char)s.run);
  }
  return k;
}

// Layered size estimate: the composite space fits iff the per-time product
// of per-agent reachable state counts (plus one slot for absent/parked)
// stays small. Saturates at cap + 1.
uint64_t joint_size_estimate(const Instance& inst, uint64_t cap) {
  const int n = (int)inst.agents.size();
  std::vector<std::vector<uint64_t>> layer(n, std::vector<uint64_t>(inst.horizon + 1, 0));
  std::vector<Successor> succ;
  for (int i = 0; i < n; ++i) {
    std::unordered_set<SearchState, SearchStateHash> seen;
    std::vector<SearchState> stack;
    for (const SearchState& s0 : start_states(inst, i))
      if (s0.t <= inst.horizon && seen.insert(s0).second) stack.push_back(s0);
    while (!stack.empty()) {
      SearchState s = stack.back();
      stack.pop_back();
      ++layer[i][s.t];
      if (seen.size() > cap) return cap + 1;
      if (s.t >= inst.horizon) continue;
      succ.clear();
      neighbors(inst, i, s, succ);
      for (const Successor& sc : succ)
        if (seen.insert(sc.state).second) stack.push_back(sc.state);
    }
  }
  uint64_t total = 0;
  for (int t = 0; t <= inst.horizon; ++t) {
    uint64_t prod = 1;
    for (int i = 0; i < n && prod <= cap; ++i) prod *= layer[i][t] + 1;
    total += prod;
    if (total > cap) return cap + 1;
  }
  return total;
}

// One time step advances every agent at once: moves are priced by the same
// expansion the single-agent planner uses, an agent standing on its goal
// with finished tasks may park (commit to its final arrival at the current
// step), and the instance is solved when everyone has parked. Co-location
// and swaps are rejected during composition, so reachable composites are
// exactly the conflict-free joint plans and the A* optimum is the true one.
bool joint_classic(const Instance& inst, const SolveConfig& cfg, const Deadline& deadline,
                   Outcome& out) {
  const int n = (int)inst.agents.size();
  if (n <= 0 || n > 31) return false;
  const uint64_t kCap = 512 * 1024;
  if (joint_size_estimate(inst, kCap) > kCap) return false;

  const uint32_t all = (uint32_t)((1u << n) - 1u);
  std::vector<uint32_t> full(n);
  std::vector<GoalVertex> goals(n);
  std::vector<double> h_unarrived(n, 0.0);
  for (int i = 0; i < n; ++i) {
    full[i] = (uint32_t)((1ull << inst.tasks_of(i).size()) - 1ull);
    goals[i] = inst.goals[inst.agents[i].fixed_goal];
    double h0 = std::numeric_limits<double>::infinity();
    for (const SearchState& s0 : start_states(inst, i))
      h0 = std::min(h0, admissible_heuristic(inst, i, s0, goals[i]));
    if (std::isinf(h0)) return false;  // unroutable alone; leave it to CBS
    h_unarrived[i] = h0;
  }

  SearchState absent;
  absent.loc = -1;
  absent.dir = -1;
  absent.t = 0;
  absent.done = 0;
  absent.run = 0;
  auto park_state = [](Loc l) {
    SearchState s;
    s.loc = l;
    s.dir = -1;
    s.t = 0;
    s.done = 0;
    s.run = 0;
    return s;
  };

  std::vector<JointNode> arena;
  std::unordered_map<std::string, double> best;
  struct JQ {
    double f;
    double g;
    uint64_t seq;
    int idx;
    bool operator>(const JQ& o) const {
      if (f != o.f) return f > o.f;
      if (g != o.g) return g < o.g;  // deeper first
      return seq > o.seq;
    }
  };
  std::priority_queue<JQ, std::vector<JQ>, std::greater<JQ>> open;
  uint64_t seq = 0;

  auto h_of = [&](const JointNode& nd) -> double {
    double h = 0.0;
    for (int i = 0; i < n; ++i) {
      if (nd.parked >> i & 1) continue;
      if (!(nd.arrived >> i & 1)) {
        h += h_unarrived[i];
        continue;
      }
      double hi = admissible_heuristic(inst, i, nd.ss[i], goals[i]);
      if (std::isinf(hi)) return hi;
      h += hi;
    }
    return h;
  };

  auto push = [&](const JointNode& nd) {
    double h = h_of(nd);
    if (std::isinf(h)) return;
    std::string key = joint_key(nd);
    auto it = best.find(key);
    if (it != best.end() && nd.g >= it->second - 1e-12) return;
    best[key] = nd.g;
    arena.push_back(nd);
    open.push({nd.g + h, nd.g, seq++, (int)arena.size() - 1});
  };

  // Roots: everyone due at time zero materializes, over all start poses.
  {
    JointNode root;
    root.ss.assign(n, absent);
    root.t = 0;
    std::function<void(int)> seed = [&](int i) {
      if (i == n) {
        push(root);
        return;
      }
      if (inst.agents[i].arrival_time != 0) {
        seed(i + 1);
        return;
      }
      for (const SearchState& s0 : start_states(inst, i)) {
        bool clash = false;
        for (int j = 0; j < i && !clash; ++j)
          clash = (root.arrived >> j & 1) && root.ss[j].loc == s0.loc;
        if (clash) continue;
        root.ss[i] = s0;
        root.arrived |= 1u << i;
        seed(i + 1);
        root.ss[i] = absent;
        root.arrived &= ~(1u << i);
      }
    };
    seed(0);
  }

  auto expired = [&]() {
    return deadline && std::chrono::steady_clock::now() > *deadline;
  };

  std::vector<Successor> succ;
  struct Opt {
    SearchState s;
    double c = 0.0;
    bool arrive = false;
    bool park = false;
    bool moving = false;
  };
  std::vector<std::vector<Opt>> opts(n);
  std::vector<const Opt*> chosen(n, nullptr);
  int64_t pops = 0;
  double last_f = 0.0;
  bool popped_any = false;

  while (!open.empty()) {
    if ((pops++ & 0x3ff) == 0 && expired()) {
      out.status = Status::Timeout;
      out.lower_bound = std::max(popped_any ? last_f : 0.0, open.top().f);
      return true;
    }
    JQ top = open.top();
    open.pop();
    JointNode nd = arena[top.idx];  // by value: pushes reallocate the arena
    {
      auto it = best.find(joint_key(nd));
      if (it != best.end() && top.g > it->second + 1e-12) continue;  // stale
    }
    last_f = top.f;
    popped_any = true;

    if (cfg.bound && top.f > *cfg.bound + 1e-9) {
      out.status = Status::Infeasible;
      out.lower_bound = top.f;
      return true;
    }

    // Done when everyone has parked; at the horizon wall there is no next
    // step to park in, so standing finished on the goal counts as parked.
    bool goal = nd.parked == all;
    if (!goal && nd.t == inst.horizon) {
      goal = true;
      for (int i = 0; i < n && goal; ++i) {
        if (nd.parked >> i & 1) continue;
        goal = (nd.arrived >> i & 1) && nd.ss[i].loc == goals[i].location &&
               (nd.ss[i].done & full[i]) == full[i];
      }
    }
    if (goal) {
      std::vector<int> chain;
      for (int w = top.idx; w >= 0; w = arena[w].parent) chain.push_back(w);
      std::reverse(chain.begin(), chain.end());
      std::vector<Path> sol(n);
      for (int i = 0; i < n; ++i) {
        Path& p = sol[i];
        p.agent = i;
        p.goal = inst.agents[i].fixed_goal;
        for (int w : chain) {
          const JointNode& x = arena[w];
          if ((x.arrived >> i & 1) && !(x.parked >> i & 1)) p.states.push_back(x.ss[i]);
        }
        for (size_t k = 0; k + 1 < p.states.size(); ++k) {
          succ.clear();
          neighbors(inst, i, p.states[k], succ);
          for (const Successor& sc : succ)
            if (sc.state == p.states[k + 1]) {
              p.cost += sc.cost;
              break;
            }
        }
      }
      out.status = Status::Optimal;
      out.cost = nd.g;
      out.lower_bound = nd.g;
      out.solution = std::move(sol);
      return true;
    }

    if (nd.t >= inst.horizon) continue;
    ++out.stats.low_level_expanded;

    bool dead = false;
    for (int i = 0; i < n && !dead; ++i) {
      auto& oi = opts[i];
      oi.clear();
      if (nd.parked >> i & 1) {
        oi.push_back({nd.ss[i], 0.0, false, true, false});
      } else if (!(nd.arrived >> i & 1)) {
        if (inst.agents[i].arrival_time == nd.t + 1) {
          for (const SearchState& s0 : start_states(inst, i))
            oi.push_back({s0, 0.0, true, false, false});
        } else {
          oi.push_back({absent, 0.0, false, false, false});
        }
      } else {
        succ.clear();
        neighbors(inst, i, nd.ss[i], succ);
        for (const Successor& sc : succ)
          oi.push_back({sc.state, sc.cost, false, false, sc.state.loc != nd.ss[i].loc});
        if (nd.ss[i].loc == goals[i].location && (nd.ss[i].done & full[i]) == full[i])
          oi.push_back({park_state(nd.ss[i].loc), 0.0, false, true, false});
      }
      dead = oi.empty();
    }
    if (dead) continue;

    JointNode child;
    child.ss.assign(n, absent);
    child.t = nd.t + 1;
    child.parent = top.idx;
    std::function<void(int, double, uint32_t, uint32_t)> compose = [&](int i, double g2,
                                                                       uint32_t arr2,
                                                                       uint32_t park2) {
      if (i == n) {
        child.g = g2;
        child.arrived = arr2;
        child.parked = park2;
        push(child);
        return;
      }
      for (const Opt& op : opts[i]) {
        bool occupies = op.arrive || (nd.arrived >> i & 1);
        if (occupies) {
          bool clash = false;
          for (int j = 0; j < i && !clash; ++j)
            clash = (arr2 >> j & 1) && child.ss[j].loc == op.s.loc;
          if (clash) continue;
        }
        if (op.moving) {
          bool swap = false;
          for (int j = 0; j < i && !swap; ++j)
            swap = chosen[j]->moving && chosen[j]->s.loc == nd.ss[i].loc &&
                   op.s.loc == nd.ss[j].loc;
          if (swap) continue;
        }
        child.ss[i] = op.s;
        chosen[i] = &op;
        compose(i + 1, g2 + op.c,
                arr2 | (occupies ? 1u << i : 0u), park2 | (op.park ? 1u << i : 0u));
      }
    };
    compose(0, nd.g, 0, 0);
  }

  out.status = Status::Infeasible;
  if (cfg.bound && popped_any) out.lower_bound = last_f;
  return true;
}

}  // namespace

Outcome solve(const Instance& inst, const SolveConfig& cfg) {
  using clock = std::chrono::steady_clock;
  const auto t_start = clock::now();

  Outcome out;
  out.horizon = inst.horizon;
  out.decision = cfg.bound.has_value();

  Deadline deadline;
  if (cfg.budget_seconds)
    deadline = t_start + std::chrono::duration_cast<clock::duration>(
                             std::chrono::duration<double>(*cfg.budget_seconds));
  auto done = [&]() -> Outcome& {
    out.stats.runtime_ms =
        std::chrono::duration<double, std::milli>(clock::now() - t_start).count();
    return out;
  };
  auto expired = [&]() { return deadline && clock::now() > *deadline; };

  const int n = (int)inst.agents.size();

  // Conflict-ignoring optimal path per usable (agent, goal) pair. These seed
  // the assignment cost matrix and every root's initial plan.
  std::map<std::pair<int, int>, Path> seed;
  bool build_timeout = false;
  auto plan_free = [&](int i, int j) -> double {
    if (inst.goals[j].type != inst.agents[i].type) return kForbidden;
    PlanResult r = plan_single(inst, i, j, {}, deadline);
    out.stats.low_level_expanded += r.expanded;
    if (r.status == PlanStatus::Deadline) {
      build_timeout = true;
      return kForbidden;
    }
    if (r.status != PlanStatus::Found) return kForbidden;
    double c = r.path.cost;
    seed[{i, j}] = std::move(r.path);
    return c;
  };

  std::vector<HLNode> arena;
  std::priority_queue<QItem, std::vector<QItem>, std::greater<QItem>> open;
  uint64_t seq = 0;
  auto push_node = [&](HLNode node) {
    arena.push_back(std::move(node));
    open.push({arena.back().cost, seq++, (int)arena.size() - 1});
  };
  auto make_root = [&](const std::vector<int>& assignment, double cost) {
    HLNode r;
    r.is_root = true;
    r.cost = cost;
    r.assignment = assignment;
    r.root_paths.reserve(n);
    for (int i = 0; i < n; ++i) r.root_paths.push_back(seed.at({i, assignment[i]}));
    push_node(std::move(r));
    ++out.stats.assignments_tried;
  };

  std::optional<AssignmentEnumerator> assignments;
  if (inst.mode.matching) {
    if ((int)inst.goals.size() != n) {
      out.status = Status::Infeasible;
      return done();
    }
    std::vector<std::vector<double>> matrix(n, std::vector<double>(n, kForbidden));
    for (int i = 0; i < n && !build_timeout; ++i)
      for (int j = 0; j < n && !build_timeout; ++j) matrix[i][j] = plan_free(i, j);
    if (build_timeout) {
      out.status = Status::Timeout;
      return done();
    }
    assignments.emplace(std::move(matrix));
    if (auto first = assignments->next()) make_root(first->goal_of_agent, first->cost);
  } else {
    std::vector<int> fixed(n);
    double total = 0.0;
    bool ok = true;
    for (int i = 0; i < n && ok && !build_timeout; ++i) {
      fixed[i] = inst.agents[i].fixed_goal;
      if (fixed[i] < 0 || fixed[i] >= (int)inst.goals.size()) {
        ok = false;
        break;
      }
      double c = plan_free(i, fixed[i]);
      if (c >= kForbidden) ok = false;
      total += c;
    }
    if (build_timeout) {
      out.status = Status::Timeout;
      return done();
    }
    if (ok) make_root(fixed, total);
  }

  // Hand compact classic instances to the joint engine, which can decide
  // them either way; CBS cannot efficiently refute an infeasible one.
  if (!inst.mode.matching && !inst.mode.timed && !open.empty() &&
      joint_classic(inst, cfg, deadline, out))
    return done();

  std::vector<const Path*> cur(n);
  std::vector<Constraint> cons;
  std::vector<int> chain;
  double last_pop = 0.0;
  bool popped_any = false;

  while (!open.empty()) {
    if (expired()) {
      out.status = Status::Timeout;
      out.lower_bound = std::max(popped_any ? last_pop : 0.0, open.top().cost);
      return done();
    }
    QItem top = open.top();
    open.pop();
    last_pop = top.cost;
    popped_any = true;

    // Lazy assignment seeding: the moment a root leaves the queue, the next
    // best assignment enters it, so the frontier always covers every
    // not-yet-generated assignment.
    if (arena[top.idx].is_root && assignments) {
      if (auto nxt = assignments->next()) make_root(nxt->goal_of_agent, nxt->cost);
    }

    if (cfg.bound && top.cost > *cfg.bound + 1e-9) {
      out.status = Status::Infeasible;
      out.lower_bound = top.cost;
      return done();
    }

    // Materialize this node's paths and constraint set.
    chain.clear();
    int walk = top.idx;
    while (arena[walk].parent >= 0) {
      chain.push_back(walk);
      walk = arena[walk].parent;
    }
    for (int i = 0; i < n; ++i) cur[i] = &arena[walk].root_paths[i];
    cons.clear();
    for (auto it = chain.rbegin(); it != chain.rend(); ++it) {
      const HLNode& nd = arena[*it];
      cur[nd.replanned.agent] = &nd.replanned;
      cons.insert(cons.end(), nd.added.begin(), nd.added.end());
    }
    std::vector<Path> paths;
    paths.reserve(n);
    for (int i = 0; i < n; ++i) paths.push_back(*cur[i]);

    auto conflicts = detect_conflicts(inst, paths);
    if (conflicts.empty()) {
      out.status = Status::Optimal;
      out.cost = top.cost;
      out.lower_bound = top.cost;
      out.solution = std::move(paths);
      return done();
    }

    ++out.stats.high_level_expanded;
    const Conflict& c = conflicts.front();

    // `paths` is a by-value copy: pushing children reallocates the arena,
    // so the `cur` pointers must not be touched from here on.
    bool alive = true;
    auto spawn = [&](int replan_agent, std::vector<Constraint> added) {
      std::vector<Constraint> cons2 = cons;
      cons2.insert(cons2.end(), added.begin(), added.end());
      PlanResult r = plan_single(inst, replan_agent, paths[replan_agent].goal, cons2, deadline);
      out.stats.low_level_expanded += r.expanded;
      if (r.status == PlanStatus::Deadline) {
        alive = false;
        return;
      }
      if (r.status != PlanStatus::Found) return;
      HLNode child;
      child.parent = top.idx;
      child.added = std::move(added);
      child.cost = top.cost - paths[replan_agent].cost + r.path.cost;
      child.replanned = std::move(r.path);
      push_node(std::move(child));
    };

    // An occupancy conflict on the goal of a classic agent that has already
    // finished cannot be fixed by dodging one timestep: the rester blocks
    // the location forever, and vertex bans recur at t+1, t+2, ... Split on
    // the rester's completion time instead: either it finishes after t, or
    // it finishes by t and the other agent may never touch the location
    // again. The two cases cover every solution, so optimality is kept.
    int rest_side = -1;
    if (!inst.mode.timed && c.kind != Conflict::Kind::Edge) {
      for (int side = 0; side < 2 && rest_side < 0; ++side) {
        int ag = side == 0 ? c.a : c.b;
        if (c.t >= paths[ag].end_time() && inst.goals[paths[ag].goal].location == c.u)
          rest_side = side;
      }
    }

    if (rest_side >= 0) {
      const int x = rest_side == 0 ? c.a : c.b;
      const int y = rest_side == 0 ? c.b : c.a;
      Constraint finish_late;
      finish_late.agent = x;
      finish_late.kind = Constraint::Kind::MinEnd;
      finish_late.t = c.t + 1;
      spawn(x, {finish_late});
      if (alive) {
        std::vector<Constraint> parked;
        Constraint finish_early;
        finish_early.agent = x;
        finish_early.kind = Constraint::Kind::MaxEnd;
        finish_early.t = c.t;
        parked.push_back(finish_early);
        for (int t2 = c.t; t2 <= inst.horizon; ++t2) {
          Constraint ban;
          ban.agent = y;
          ban.u = c.u;
          ban.t = t2;
          parked.push_back(ban);
        }
        spawn(y, std::move(parked));
      }
    } else {
      for (int side = 0; side < 2 && alive; ++side) {
        Constraint nc;
        nc.agent = side == 0 ? c.a : c.b;
        nc.t = c.t;
        if (c.kind == Conflict::Kind::Edge) {
          nc.kind = Constraint::Kind::Arc;
          nc.u = side == 0 ? c.u : c.v;
          nc.v = side == 0 ? c.v : c.u;
        } else {
          nc.u = c.u;
        }
        spawn(nc.agent, {nc});
      }
    }
    if (!alive) {
      out.status = Status::Timeout;
      out.lower_bound = last_pop;
      return done();
    }
  }

  out.status = Status::Infeasible;
  if (cfg.bound && popped_any) out.lower_bound = last_pop;
  return done();
}

std::optional<double> lower_bound(const Instance& inst) {
  const int n = (int)inst.agents.size();
  if (inst.mode.matching) {
    if ((int)inst.goals.size() != n) return std::nullopt;
    std::vector<std::vector<double>> matrix(n, std::vector<double>(n, kForbidden));
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        if (inst.goals[j].type != inst.agents[i].type) continue;
        PlanResult r = plan_single(inst, i, j, {});
        if (r.status == PlanStatus::Found) matrix[i][j] = r.path.cost;
      }
    auto best = min_cost_assignment(matrix);
    if (!best) return std::nullopt;
    return best->cost;
  }
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    int g = inst.agents[i].fixed_goal;
    if (g < 0 || g >= (int)inst.goals.size()) return std::nullopt;
    PlanResult r = plan_single(inst, i, g, {});
    if (r.status != PlanStatus::Found) return std::nullopt;
    total += r.path.cost;
  }
  return total;
}

}  // namespace shuntbound
