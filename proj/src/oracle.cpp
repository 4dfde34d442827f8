#include "shuntbound/oracle.hpp"

#include <algorithm>
#include <chrono>
#include <queue>
#include <stdexcept>
#include <unordered_map>

namespace shuntbound {

namespace {

constexpr int kMaxTasksPerAgent = 4;

enum Phase : uint8_t { kPending = 0, kActive = 1, kDone = 2 };

// One agent's slice of a joint state, packed into 16 bits.
struct Sub {
  uint8_t phase = kPending;
  uint8_t loc = 0;
  uint8_t dir = 0;
  uint8_t run = 0;
  uint8_t done = 0;
};

uint16_t pack(const Sub& s) {
  return (uint16_t)(s.phase | (s.loc << 2) | (s.dir << 6) | (s.run << 7) | (s.done << 11));
}

Sub unpack(uint16_t b) {
  Sub s;
  s.phase = b & 3;
  s.loc = (b >> 2) & 15;
  s.dir = (b >> 6) & 1;
  s.run = (b >> 7) & 15;
  s.done = (b >> 11) & 15;
  return s;
}

uint64_t pack_joint(const std::vector<Sub>& subs) {
  uint64_t k = 0;
  for (size_t i = 0; i < subs.size(); ++i) k |= (uint64_t)pack(subs[i]) << (16 * i);
  return k;
}

// Everything the search needs, derived from the instance from first
// principles (the direction arcs are rebuilt from the edge side labels, not
// taken from the solver's split graph).
struct World {
  const Instance& inst;
  int n_agents;
  int n_locs;
  bool dirs;
  double wcost;
  std::vector<std::vector<int>> arcs;       // directional node -> nodes (dirs mode)
  std::vector<std::vector<int>> steps_dir;  // directional node -> min steps per location
  std::vector<std::vector<int>> steps_loc;  // location -> min steps per location
  std::vector<std::vector<const ServiceTask*>> tasks;

  explicit World(const Instance& instance) : inst(instance) {
    n_agents = (int)inst.agents.size();
    n_locs = (int)inst.graph.locations.size();
    dirs = inst.mode.directions;
    wcost = inst.costs.wait_cost ? *inst.costs.wait_cost : (inst.mode.timed ? 0.0 : 1.0);

    tasks.resize(n_agents);
    if (inst.mode.services)
      for (int i = 0; i < n_agents; ++i)
        for (const ServiceTask& t : inst.agents[i].tasks) tasks[i].push_back(&t);

    if (dirs) {
      arcs.assign(n_locs * 2, {});
      auto node = [](int l, Dir d) { return l * 2 + (int)d; };
      for (const TrackGraph::Edge& e : inst.graph.edges) {
        arcs[node(e.u, e.side_u)].push_back(node(e.v, opposite(e.side_v)));
        arcs[node(e.v, e.side_v)].push_back(node(e.u, opposite(e.side_u)));
      }
      for (auto& a : arcs) {
        std::sort(a.begin(), a.end());
        a.erase(std::unique(a.begin(), a.end()), a.end());
      }
      steps_dir.assign(n_locs * 2, std::vector<int>(n_locs, -1));
      for (int s = 0; s < n_locs * 2; ++s) {
        std::vector<int> d(n_locs * 2, -1);
        std::queue<int> q;
        d[s] = 0;
        q.push(s);
        while (!q.empty()) {
          int x = q.front();
          q.pop();
          auto visit = [&](int y) {
            if (d[y] < 0) {
              d[y] = d[x] + 1;
              q.push(y);
            }
          };
          for (int y : arcs[x]) visit(y);
          if (inst.graph.locations[x / 2].reversible) visit(x ^ 1);
        }
        for (int l = 0; l < n_locs; ++l) {
          int a = d[l * 2], b = d[l * 2 + 1];
          steps_dir[s][l] = a < 0 ? b : (b < 0 ? a : std::min(a, b));
        }
      }
    } else {
      steps_loc.assign(n_locs, std::vector<int>(n_locs, -1));
      for (int s = 0; s < n_locs; ++s) {
        std::vector<int>& d = steps_loc[s];
        std::queue<int> q;
        d[s] = 0;
        q.push(s);
        while (!q.empty()) {
          int x = q.front();
          q.pop();
          for (Loc y : inst.graph.adj[x])
            if (d[y] < 0) {
              d[y] = d[x] + 1;
              q.push(y);
            }
        }
      }
    }
  }

  int min_steps(const Sub& s, Loc target) const {
    if (dirs) return steps_dir[s.loc * 2 + s.dir][target];
    return steps_loc[s.loc][target];
  }

  uint8_t progress(int agent, uint8_t loc, uint8_t run, uint8_t done) const {
    for (size_t i = 0; i < tasks[agent].size(); ++i) {
      if (done & (1u << i)) continue;
      const ServiceTask& t = *tasks[agent][i];
      if (run < t.duration) continue;
      if (std::find(t.locations.begin(), t.locations.end(), (Loc)loc) != t.locations.end())
        done |= (1u << i);
    }
    return done;
  }

  uint8_t full_mask(int agent) const { return (uint8_t)((1u << tasks[agent].size()) - 1u); }
};

struct Option {
  Sub sub;
  double cost = 0.0;
  bool moved = false;
  uint8_t from = 0;
};

struct Rec {
  uint64_t key = 0;
  int layer = 0;
  int parent = -1;
  double cost = 0.0;
};

// One agent's legal evolutions from layer t to t+1 under a fixed goal.
void agent_options(const World& w, int agent, const Sub& s, int t, const GoalVertex& goal,
                   std::vector<Option>& out) {
  const Instance& inst = w.inst;
  const Agent& a = inst.agents[agent];

  if (s.phase == kPending) {
    if (a.arrival_time > t + 1) {
      out.push_back({s, 0.0, false, 0});
      return;
    }
    // materializes at t+1
    auto appear = [&](uint8_t d) {
      Sub n;
      n.phase = kActive;
      n.loc = (uint8_t)a.arrival_loc;
      n.dir = d;
      n.run = 1;
      n.done = w.progress(agent, n.loc, 1, 0);
      out.push_back({n, 0.0, false, 0});
    };
    if (!w.dirs)
      appear(0);
    else if (a.arrival_dir)
      appear((uint8_t)*a.arrival_dir);
    else {
      appear(0);
      appear(1);
    }
    return;
  }
  if (s.phase == kDone) {
    out.push_back({s, 0.0, false, 0});
    return;
  }

  const bool finished = s.loc == goal.location && s.done == w.full_mask(agent);
  if (inst.mode.timed && t == goal.time) {
    if (finished) {
      Sub n;
      n.phase = kDone;  // departed; occupies nothing
      out.push_back({n, 0.0, false, 0});
    }
    return;  // staying past the departure slot is not an option
  }
  if (!inst.mode.timed && finished) {
    Sub n;
    n.phase = kDone;  // rests at the goal from t+1 on
    n.loc = s.loc;
    out.push_back({n, 0.0, false, 0});
  }
  if (t >= inst.horizon) return;

  const int deadline = inst.mode.timed ? goal.time : inst.horizon;
  auto push = [&](uint8_t loc, uint8_t dir, uint8_t run, double cost, bool moved) {
    Sub n;
    n.phase = kActive;
    n.loc = loc;
    n.dir = dir;
    n.run = run;
    n.done = w.progress(agent, loc, run, s.done);
    int left = w.dirs ? w.steps_dir[loc * 2 + dir][goal.location] : w.steps_loc[loc][goal.location];
    if (left < 0 || t + 1 + left > deadline) return;  // can no longer make it
    out.push_back({n, cost, moved, s.loc});
  };

  uint8_t stay_run = (uint8_t)std::min(s.run + 1, 15);
  if (w.dirs) {
    for (int m : w.arcs[s.loc * 2 + s.dir])
      push((uint8_t)(m / 2), (uint8_t)(m & 1), 1, inst.costs.move_cost, true);
  } else {
    for (Loc m : inst.graph.adj[s.loc]) push((uint8_t)m, 0, 1, inst.costs.move_cost, true);
  }
  bool wait_ok = true;
  if (inst.max_dwell && inst.graph.locations[s.loc].no_parking) wait_ok = s.run <= *inst.max_dwell;
  if (wait_ok) push(s.loc, s.dir, stay_run, w.wcost, false);
  if (w.dirs && inst.graph.locations[s.loc].reversible)
    push(s.loc, s.dir ^ 1, stay_run, inst.costs.reversal_cost, false);
}

struct RunResult {
  bool feasible = false;
  double cost = 0.0;
  std::vector<Rec> arena;
  int best = -1;
};

// Exhaustive layered search for one fixed agent->goal assignment.
RunResult run_assignment(const World& w, const std::vector<int>& assignment) {
  const Instance& inst = w.inst;
  const int n = w.n_agents;
  RunResult res;

  // Does a done agent still occupy its location? Classic: yes (rests);
  // timed: no (departed). Canonical packed form for a departed agent is all
  // zeros except the phase.
  const bool done_occupies = !inst.mode.timed;

  auto occupied = [&](const Sub& s) { return s.phase == kActive || (s.phase == kDone && done_occupies); };

  std::vector<Rec> arena;
  std::vector<std::unordered_map<uint64_t, int>> layer(inst.horizon + 2);
  double best_cost = 0.0;
  int best = -1;

  auto all_done = [&](const std::vector<Sub>& subs) {
    for (const Sub& s : subs)
      if (s.phase != kDone) return false;
    return true;
  };

  auto insert = [&](int t, const std::vector<Sub>& subs, double cost, int parent) {
    uint64_t key = pack_joint(subs);
    auto [it, fresh] = layer[t].try_emplace(key, (int)arena.size());
    if (fresh) {
      arena.push_back({key, t, parent, cost});
    } else if (cost < arena[it->second].cost) {
      arena[it->second].cost = cost;
      arena[it->second].parent = parent;
    } else {
      return;
    }
    if (all_done(subs) && (best < 0 || cost < best_cost)) {
      best_cost = cost;
      best = it->second;
    }
  };

  // initial layer
  {
    std::vector<std::vector<Sub>> seeds{{}};
    for (int i = 0; i < n; ++i) {
      const Agent& a = inst.agents[i];
      std::vector<std::vector<Sub>> next;
      for (const auto& partial : seeds) {
        auto extend = [&](const Sub& s) {
          auto copy = partial;
          copy.push_back(s);
          next.push_back(std::move(copy));
        };
        if (a.arrival_time > 0) {
          extend(Sub{});
        } else {
          auto appear = [&](uint8_t d) {
            Sub s;
            s.phase = kActive;
            s.loc = (uint8_t)a.arrival_loc;
            s.dir = d;
            s.run = 1;
            s.done = w.progress(i, s.loc, 1, 0);
            extend(s);
          };
          if (!w.dirs)
            appear(0);
          else if (a.arrival_dir)
            appear((uint8_t)*a.arrival_dir);
          else {
            appear(0);
            appear(1);
          }
        }
      }
      seeds = std::move(next);
    }
    for (const auto& subs : seeds) {
      bool legal = true;
      for (int i = 0; i < n && legal; ++i)
        for (int j = i + 1; j < n && legal; ++j)
          if (occupied(subs[i]) && occupied(subs[j]) && subs[i].loc == subs[j].loc) legal = false;
      if (legal) insert(0, subs, 0.0, -1);
    }
  }

  std::vector<std::vector<Option>> opts(n);
  std::vector<int> pick(n);
  std::vector<Sub> subs(n), nsubs(n);

  for (int t = 0; t <= inst.horizon; ++t) {
    // snapshot: expansion adds only to later layers
    std::vector<std::pair<uint64_t, int>> states(layer[t].begin(), layer[t].end());
    std::sort(states.begin(), states.end());
    for (auto [key, idx] : states) {
      const double base = arena[idx].cost;
      for (int i = 0; i < n; ++i) subs[i] = unpack((uint16_t)(key >> (16 * i)));
      if (all_done(subs)) continue;  // absorbing

      bool dead = false;
      for (int i = 0; i < n; ++i) {
        opts[i].clear();
        agent_options(w, i, subs[i], t, inst.goals[assignment[i]], opts[i]);
        if (opts[i].empty()) {
          dead = true;
          break;
        }
      }
      if (dead) continue;

      std::fill(pick.begin(), pick.end(), 0);
      while (true) {
        double cost = base;
        for (int i = 0; i < n; ++i) {
          const Option& o = opts[i][pick[i]];
          nsubs[i] = o.sub;
          cost += o.cost;
        }
        bool legal = true;
        for (int i = 0; i < n && legal; ++i) {
          if (!occupied(nsubs[i])) continue;
          for (int j = i + 1; j < n && legal; ++j)
            if (occupied(nsubs[j]) && nsubs[i].loc == nsubs[j].loc) legal = false;
        }
        for (int i = 0; i < n && legal; ++i) {
          const Option& oi = opts[i][pick[i]];
          if (!oi.moved) continue;
          for (int j = i + 1; j < n && legal; ++j) {
            const Option& oj = opts[j][pick[j]];
            if (oj.moved && oi.from == nsubs[j].loc && oj.from == nsubs[i].loc) legal = false;
          }
        }
        if (legal) insert(t + 1, nsubs, cost, idx);

        int k = n - 1;
        while (k >= 0 && pick[k] + 1 >= (int)opts[k].size()) pick[k--] = 0;
        if (k < 0) break;
        ++pick[k];
      }
    }
  }

  res.feasible = best >= 0;
  res.cost = best_cost;
  res.best = best;
  res.arena = std::move(arena);
  return res;
}

}  // namespace

Outcome brute_force(const Instance& inst) {
  const auto t_start = std::chrono::steady_clock::now();
  const int n = (int)inst.agents.size();
  if (n > kOracleMaxAgents) throw std::invalid_argument("oracle: too many agents");
  if ((int)inst.graph.locations.size() > kOracleMaxLocations)
    throw std::invalid_argument("oracle: too many locations");
  if (inst.horizon > kOracleMaxHorizon) throw std::invalid_argument("oracle: horizon too long");
  for (const Agent& a : inst.agents)
    if (inst.mode.services && (int)a.tasks.size() > kMaxTasksPerAgent)
      throw std::invalid_argument("oracle: too many tasks per agent");

  Outcome out;
  out.horizon = inst.horizon;
  out.engine = "oracle";
  World w(inst);

  // every type-respecting bijection agents -> goals
  std::vector<std::vector<int>> assignments;
  if ((int)inst.goals.size() == n) {
    if (inst.mode.matching) {
      std::vector<int> acc(n, -1);
      std::vector<char> used(n, 0);
      auto rec = [&](auto&& self, int i) -> void {
        if (i == n) {
          assignments.push_back(acc);
          return;
        }
        for (int g = 0; g < n; ++g) {
          if (used[g] || inst.goals[g].type != inst.agents[i].type) continue;
          used[g] = 1;
          acc[i] = g;
          self(self, i + 1);
          used[g] = 0;
        }
      };
      rec(rec, 0);
    } else {
      std::vector<int> fixed(n);
      bool ok = true;
      for (int i = 0; i < n; ++i) {
        fixed[i] = inst.agents[i].fixed_goal;
        if (fixed[i] < 0 || fixed[i] >= (int)inst.goals.size() ||
            inst.goals[fixed[i]].type != inst.agents[i].type)
          ok = false;
      }
      if (ok) assignments.push_back(fixed);
    }
  }

  RunResult best;
  std::vector<int> best_assignment;
  for (const auto& as : assignments) {
    ++out.stats.assignments_tried;
    RunResult r = run_assignment(w, as);
    if (!r.feasible) continue;
    if (!best.feasible || r.cost < best.cost) {
      best = std::move(r);
      best_assignment = as;
    }
  }

  if (!best.feasible) {
    out.status = Status::Infeasible;
    out.stats.runtime_ms = std::chrono::duration<double, std::milli>(
                               std::chrono::steady_clock::now() - t_start)
                               .count();
    return out;
  }

  // reconstruct the joint trajectory
  std::vector<int> chain;
  for (int i = best.best; i >= 0; i = best.arena[i].parent) chain.push_back(i);
  std::reverse(chain.begin(), chain.end());

  out.solution.resize(n);
  for (int i = 0; i < n; ++i) {
    Path& p = out.solution[i];
    p.agent = i;
    p.goal = best_assignment[i];
    Sub prev;
    bool prev_valid = false;
    for (int rec_idx : chain) {
      const Rec& rec = best.arena[rec_idx];
      Sub s = unpack((uint16_t)(rec.key >> (16 * i)));
      if (s.phase == kActive) {
        SearchState st;
        st.loc = s.loc;
        st.dir = w.dirs ? (int8_t)s.dir : (int8_t)-1;
        st.t = rec.layer;
        st.run = s.run;
        st.done = s.done;
        p.states.push_back(st);
        if (prev_valid && prev.phase == kActive) {
          if (s.loc != prev.loc)
            p.cost += inst.costs.move_cost;
          else if (s.dir != prev.dir)
            p.cost += inst.costs.reversal_cost;
          else
            p.cost += w.wcost;
        }
      }
      prev = s;
      prev_valid = true;
    }
  }

  out.status = Status::Optimal;
  out.cost = best.cost;
  out.lower_bound = best.cost;
  out.stats.runtime_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t_start)
          .count();
  return out;
}

bool trajectory_legal(const Instance& inst, std::span<const Path> paths) {
  int t_max = 0;
  for (const Path& p : paths) t_max = std::max(t_max, p.end_time());

  auto pos = [&](const Path& p, int t) -> Loc {
    if (p.states.empty() || t < p.start_time()) return -1;
    if (t <= p.end_time()) return p.states[t - p.start_time()].loc;
    return inst.mode.timed ? -1 : p.states.back().loc;
  };
  auto move_of = [&](const Path& p, int t) -> std::pair<Loc, Loc> {
    if (p.states.empty() || t < p.start_time() || t >= p.end_time()) return {-1, -1};
    size_t k = t - p.start_time();
    return {p.states[k].loc, p.states[k + 1].loc};
  };

  for (int t = 0; t <= t_max; ++t)
    for (size_t i = 0; i < paths.size(); ++i)
      for (size_t j = i + 1; j < paths.size(); ++j) {
        Loc a = pos(paths[i], t), b = pos(paths[j], t);
        if (a >= 0 && a == b) return false;
        auto [fu, fv] = move_of(paths[i], t);
        auto [gu, gv] = move_of(paths[j], t);
        if (fu >= 0 && gu >= 0 && fu != fv && fu == gv && fv == gu) return false;
      }
  return true;
}

}  // namespace shuntbound
