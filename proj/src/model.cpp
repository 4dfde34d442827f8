#include "shuntbound/model.hpp"

#include <algorithm>
#include <queue>
#include <sstream>
#include <stdexcept>

#include "shuntbound/graph.hpp"

namespace shuntbound {

const char* to_string(Dir d) { return d == Dir::Left ? "left" : "right"; }

std::optional<Dir> dir_from_string(const std::string& s) {
  if (s == "left") return Dir::Left;
  if (s == "right") return Dir::Right;
  return std::nullopt;
}

Loc TrackGraph::find(const std::string& name) const {
  auto it = by_name.find(name);
  return it == by_name.end() ? -1 : it->second;
}

bool TrackGraph::allows_task(Loc l, const std::string& kind) const {
  const auto& kinds = locations[l].task_kinds;
  return std::binary_search(kinds.begin(), kinds.end(), kind);
}

void TrackGraph::rebuild_adjacency() {
  adj.assign(locations.size(), {});
  for (const Edge& e : edges) {
    adj[e.u].push_back(e.v);
    adj[e.v].push_back(e.u);
  }
  for (auto& list : adj) {
    std::sort(list.begin(), list.end());
    list.erase(std::unique(list.begin(), list.end()), list.end());
  }
  by_name.clear();
  for (Loc l = 0; l < (Loc)locations.size(); ++l) by_name[locations[l].name] = l;
}

bool TrackGraph::connected() const {
  if (locations.empty()) return true;
  std::vector<char> seen(locations.size(), 0);
  std::queue<Loc> q;
  q.push(0);
  seen[0] = 1;
  size_t count = 1;
  while (!q.empty()) {
    Loc l = q.front();
    q.pop();
    for (Loc n : adj[l]) {
      if (!seen[n]) {
        seen[n] = 1;
        ++count;
        q.push(n);
      }
    }
  }
  return count == locations.size();
}

std::string TrackGraph::dump() const {
  std::ostringstream os;
  for (Loc l = 0; l < (Loc)locations.size(); ++l) {
    const LocationInfo& info = locations[l];
    os << info.name;
    if (info.reversible) os << " rev";
    if (info.no_parking) os << " nopark";
    for (const auto& k : info.task_kinds) os << " +" << k;
    os << " :";
    for (Loc n : adj[l]) os << ' ' << locations[n].name;
    os << '\n';
  }
  return os.str();
}

std::span<const ServiceTask> Instance::tasks_of(int agent) const {
  if (!mode.services) return {};
  return agents[agent].tasks;
}

void Instance::finalize() {
  if (mode.directions) {
    dgraph = split_directions(graph);
  } else {
    dgraph.reset();
  }
  dist = build_distances(graph, dgraph ? &*dgraph : nullptr, costs);

  for (Agent& a : agents)
    for (ServiceTask& task : a.tasks) {
      std::sort(task.locations.begin(), task.locations.end());
      task.locations.erase(std::unique(task.locations.begin(), task.locations.end()),
                           task.locations.end());
    }

  int cap = 1;
  if (mode.services) {
    for (const Agent& a : agents)
      for (const ServiceTask& task : a.tasks) cap = std::max(cap, task.duration);
  }
  if (max_dwell) cap = std::max(cap, std::min(*max_dwell + 1, horizon + 1));
  run_cap = cap;
}

std::string ValidationReport::summary() const {
  std::ostringstream os;
  for (const auto& e : errors) os << "error [" << e.code << "] " << e.message << '\n';
  for (const auto& w : warnings) os << "warning [" << w.code << "] " << w.message << '\n';
  if (errors.empty()) os << "instance admissible\n";
  return os.str();
}

namespace {

std::string loc_name(const Instance& inst, Loc l) { return inst.graph.locations[l].name; }

// Directional reachability from the agent's allowed start rails.
std::vector<char> reachable_dnodes(const Instance& inst, const Agent& a) {
  const DirectedYardGraph& dg = *inst.dgraph;
  std::vector<char> seen(dg.move_out.size(), 0);
  std::queue<int32_t> q;
  auto push = [&](int32_t n) {
    if (!seen[n]) {
      seen[n] = 1;
      q.push(n);
    }
  };
  if (a.arrival_dir) {
    push(DirectedYardGraph::node(a.arrival_loc, *a.arrival_dir));
  } else {
    push(DirectedYardGraph::node(a.arrival_loc, Dir::Left));
    push(DirectedYardGraph::node(a.arrival_loc, Dir::Right));
  }
  while (!q.empty()) {
    int32_t n = q.front();
    q.pop();
    for (int32_t m : dg.move_out[n]) push(m);
    Loc l = DirectedYardGraph::loc_of(n);
    if (dg.reversible[l]) push(DirectedYardGraph::node(l, opposite(DirectedYardGraph::dir_of(n))));
  }
  return seen;
}

}  // namespace

ValidationReport validate_instance(const Instance& inst) {
  ValidationReport report;
  auto error = [&](std::string code, std::string msg) {
    report.errors.push_back({std::move(code), std::move(msg)});
  };
  auto warn = [&](std::string code, std::string msg) {
    report.warnings.push_back({std::move(code), std::move(msg)});
  };

  if (!inst.graph.connected()) error("disconnected", "location graph is not connected");
  if (inst.costs.move_cost < 0 || inst.costs.reversal_cost < 0 ||
      (inst.costs.wait_cost && *inst.costs.wait_cost < 0))
    error("negative-cost", "edge costs must be non-negative");

  // Per-type balance between arrivals and departures.
  std::vector<int> agent_count(inst.types.size(), 0), goal_count(inst.types.size(), 0);
  for (const Agent& a : inst.agents) agent_count[a.type]++;
  for (const GoalVertex& g : inst.goals) goal_count[g.type]++;
  for (size_t o = 0; o < inst.types.size(); ++o) {
    if (agent_count[o] != goal_count[o]) {
      std::ostringstream os;
      os << "type count mismatch for '" << inst.types[o] << "': " << agent_count[o]
         << " agents vs " << goal_count[o] << " goals";
      error("type-count-mismatch", os.str());
    }
  }

  if (inst.mode.matching) {
    for (const Agent& a : inst.agents)
      if (a.fixed_goal >= 0)
        error("fixed-goal-in-matching", "agent '" + a.id + "' carries a fixed goal in matching mode");
  } else {
    for (const Agent& a : inst.agents)
      if (a.fixed_goal < 0 || a.fixed_goal >= (int)inst.goals.size())
        error("missing-fixed-goal", "agent '" + a.id + "' has no fixed goal in classic mode");
      else if (inst.goals[a.fixed_goal].type != a.type)
        error("fixed-goal-type", "agent '" + a.id + "' is assigned a goal of another type");
    if (inst.mode.timed) error("classic-timed", "timed mode requires matching goals");
  }

  // Horizon covers every departure.
  for (const GoalVertex& g : inst.goals) {
    if (g.time > inst.horizon) {
      std::ostringstream os;
      os << "goal at " << loc_name(inst, g.location) << " departs at t=" << g.time
         << " beyond horizon " << inst.horizon;
      error("goal-beyond-horizon", os.str());
    }
    if (inst.mode.timed && g.time < 0)
      error("untimed-goal", "timed mode requires a departure time on every goal");
  }
  for (const Agent& a : inst.agents)
    if (a.arrival_time > inst.horizon)
      error("arrival-beyond-horizon", "agent '" + a.id + "' arrives after the horizon");

  // Every departure needs a same-type agent that can be there in time.
  if (inst.mode.timed) {
    for (const GoalVertex& g : inst.goals) {
      bool satisfiable = false;
      for (const Agent& a : inst.agents) {
        if (a.type != g.type) continue;
        if (a.arrival_time < g.time ||
            (a.arrival_time == g.time && a.arrival_loc == g.location)) {
          satisfiable = true;
          break;
        }
      }
      if (!satisfiable && g.time >= 0) {
        std::ostringstream os;
        os << "goal at " << loc_name(inst, g.location) << " t=" << g.time
           << " precedes every arrival of type '" << inst.types[g.type] << "'";
        error("goal-before-arrivals", os.str());
      }
    }
    for (const Agent& a : inst.agents) {
      bool has_departure = false;
      for (const GoalVertex& g : inst.goals) {
        if (g.type != a.type) continue;
        if (a.arrival_time < g.time ||
            (a.arrival_time == g.time && a.arrival_loc == g.location)) {
          has_departure = true;
          break;
        }
      }
      if (!has_departure && !inst.goals.empty())
        error("arrival-after-departures",
              "agent '" + a.id + "' arrives after all departures of its type");
    }
  }

  // Irreversible dead ends trap any agent entering them.
  if (inst.mode.directions) {
    for (Loc l = 0; l < (Loc)inst.graph.locations.size(); ++l) {
      if (inst.graph.adj[l].size() == 1 && !inst.graph.locations[l].reversible) {
        error("dead-end-without-reversal",
              "location " + loc_name(inst, l) + " is a dead-end without reversal");
      }
    }
  }

  // Goal reachability from same-type arrivals.
  for (size_t gi = 0; gi < inst.goals.size(); ++gi) {
    const GoalVertex& g = inst.goals[gi];
    bool reachable = false;
    for (const Agent& a : inst.agents) {
      if (a.type != g.type) continue;
      if (inst.mode.directions && inst.dgraph) {
        auto seen = reachable_dnodes(inst, a);
        if (seen[DirectedYardGraph::node(g.location, Dir::Left)] ||
            seen[DirectedYardGraph::node(g.location, Dir::Right)]) {
          reachable = true;
          break;
        }
      } else {
        if (inst.dist.loc_hops[a.arrival_loc][g.location] >= 0) {
          reachable = true;
          break;
        }
      }
    }
    if (!reachable && !inst.agents.empty()) {
      std::ostringstream os;
      os << "goal " << gi << " at " << loc_name(inst, g.location)
         << " unreachable from every arrival of its type";
      error("unreachable-goal", os.str());
    }
  }

  // Service tasks.
  for (const Agent& a : inst.agents) {
    if (a.tasks.size() > 30)
      error("too-many-tasks", "agent '" + a.id + "' exceeds the 30-task limit");
    for (const ServiceTask& task : a.tasks) {
      if (task.duration < 1)
        error("bad-task-duration", "task '" + task.id + "' has duration < 1");
      if (task.locations.empty())
        error("empty-task-locations", "task '" + task.id + "' has no location offering '" +
                                          task.kind + "'");
      for (Loc l : task.locations)
        if (!inst.graph.allows_task(l, task.kind))
          error("task-kind-mismatch", "task '" + task.id + "' lists " + loc_name(inst, l) +
                                          " which does not allow '" + task.kind + "'");
    }
  }

  // Advisory findings.
  if (inst.max_dwell && !inst.mode.timed && !inst.mode.matching)
    warn("max-dwell-classic", "max_dwell in classic mode restricts terminal rests as well");
  bool any_no_parking = false;
  for (const auto& li : inst.graph.locations) any_no_parking |= li.no_parking;
  if (any_no_parking && !inst.max_dwell)
    warn("no-parking-unused", "no-parking locations present but max_dwell is unset");

  return report;
}

Instance relax_instance(const Instance& instance, int level) {
  if (level < 0 || level >= kRelaxLevels) throw std::invalid_argument("invalid ladder level");
  if (level == 3) return instance;

  Instance out = instance;
  out.dgraph.reset();

  // Levels 0-2 pool goals anonymously; untimed classic goals depart at T_max.
  out.mode.matching = true;
  out.mode.timed = true;
  for (Agent& a : out.agents) a.fixed_goal = -1;
  for (GoalVertex& g : out.goals)
    if (g.time < 0) g.time = out.horizon;

  out.mode.services = false;
  for (Agent& a : out.agents) a.tasks.clear();

  if (level >= 2) {
    out.mode.directions = instance.mode.directions;
  } else {
    out.mode.directions = false;
    for (Agent& a : out.agents) a.arrival_dir.reset();
  }

  if (level == 0) {
    out.types = {"unit"};
    for (Agent& a : out.agents) {
      a.type = 0;
      a.arrival_time = 0;
    }
    for (GoalVertex& g : out.goals) {
      g.type = 0;
      g.time = out.horizon;
    }
  }

  out.finalize();
  return out;
}

}  // namespace shuntbound
