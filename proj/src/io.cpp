#include "shuntbound/io.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "shuntbound/graph.hpp"

namespace shuntbound {

using nlohmann::json;

namespace {

[[noreturn]] void bail(const std::string& msg) { throw std::runtime_error(msg); }

Dir parse_dir(const json& j, const std::string& what) {
  if (!j.is_string()) bail(what + ": expected \"left\" or \"right\"");
  auto d = dir_from_string(j.get<std::string>());
  if (!d) bail(what + ": expected \"left\" or \"right\", got \"" + j.get<std::string>() + "\"");
  return *d;
}

Loc find_location(const Instance& inst, const json& j, const std::string& what) {
  if (!j.is_string()) bail(what + ": expected a location name");
  Loc l = inst.graph.find(j.get<std::string>());
  if (l < 0) bail(what + ": unknown location \"" + j.get<std::string>() + "\"");
  return l;
}

TrackGraph yard_from_json(const json& jy) {
  if (jy.contains("tracks")) {
    YardSpec spec;
    spec.min_train_length_m = jy.at("min_train_length_m").get<double>();
    for (const json& jt : jy.at("tracks")) {
      TrackSpec t;
      t.id = jt.at("id").get<std::string>();
      t.length_m = jt.at("length_m").get<double>();
      t.reversible = jt.value("reversible", true);
      t.no_parking = jt.value("no_parking", false);
      spec.tracks.push_back(std::move(t));
    }
    if (jy.contains("connections"))
      for (const json& jc : jy.at("connections")) {
        ConnectionSpec c;
        c.track_a = jc.at("a").get<std::string>();
        c.end_a = jc.contains("end_a") ? parse_dir(jc.at("end_a"), "connection end_a") : Dir::Right;
        c.track_b = jc.at("b").get<std::string>();
        c.end_b = jc.contains("end_b") ? parse_dir(jc.at("end_b"), "connection end_b") : Dir::Left;
        spec.connections.push_back(std::move(c));
      }
    if (jy.contains("service_points"))
      for (const json& js : jy.at("service_points"))
        spec.service_points.push_back(
            {js.at("track").get<std::string>(), js.at("kind").get<std::string>()});
    return discretize_yard(spec);
  }

  TrackGraph g;
  for (const json& jl : jy.at("locations")) {
    LocationInfo info;
    info.name = jl.at("name").get<std::string>();
    info.reversible = jl.value("reversible", true);
    info.no_parking = jl.value("no_parking", false);
    if (jl.contains("task_kinds"))
      for (const json& jk : jl.at("task_kinds")) info.task_kinds.push_back(jk.get<std::string>());
    std::sort(info.task_kinds.begin(), info.task_kinds.end());
    if (g.by_name.count(info.name)) bail("duplicate location name \"" + info.name + "\"");
    g.by_name[info.name] = (Loc)g.locations.size();
    g.locations.push_back(std::move(info));
  }
  auto must = [&](const json& j, const std::string& what) {
    auto it = g.by_name.find(j.get<std::string>());
    if (it == g.by_name.end()) bail(what + ": unknown location \"" + j.get<std::string>() + "\"");
    return it->second;
  };
  if (jy.contains("edges"))
    for (const json& je : jy.at("edges")) {
      TrackGraph::Edge e;
      e.u = must(je.at("u"), "edge u");
      e.v = must(je.at("v"), "edge v");
      if (e.u == e.v) bail("self-loop edge at \"" + g.locations[e.u].name + "\"");
      e.side_u = je.contains("side_u") ? parse_dir(je.at("side_u"), "edge side_u") : Dir::Right;
      e.side_v = je.contains("side_v") ? parse_dir(je.at("side_v"), "edge side_v") : Dir::Left;
      g.edges.push_back(e);
    }
  g.rebuild_adjacency();
  return g;
}

}  // namespace

Instance instance_from_json(const json& j, const std::string& name) {
  try {
    Instance inst;
    inst.name = j.value("name", name);
    inst.graph = yard_from_json(j.at("yard"));

    if (j.contains("mode")) {
      const json& jm = j.at("mode");
      inst.mode.matching = jm.value("matching", false);
      inst.mode.directions = jm.value("directions", false);
      inst.mode.services = jm.value("services", false);
      inst.mode.timed = jm.value("timed", false);
    }

    inst.horizon = j.at("horizon").get<int>();
    if (j.contains("max_dwell") && !j.at("max_dwell").is_null())
      inst.max_dwell = j.at("max_dwell").get<int>();

    if (j.contains("costs")) {
      const json& jc = j.at("costs");
      inst.costs.move_cost = jc.value("move", 1.0);
      inst.costs.reversal_cost = jc.value("reversal", 0.0);
      if (jc.contains("wait") && !jc.at("wait").is_null())
        inst.costs.wait_cost = jc.at("wait").get<double>();
    }

    auto type_index = [&](const std::string& t) {
      for (size_t i = 0; i < inst.types.size(); ++i)
        if (inst.types[i] == t) return (int)i;
      inst.types.push_back(t);
      return (int)inst.types.size() - 1;
    };
    if (j.contains("types"))
      for (const json& jt : j.at("types")) {
        std::string t = jt.get<std::string>();
        for (const auto& known : inst.types)
          if (known == t) bail("duplicate type \"" + t + "\"");
        inst.types.push_back(std::move(t));
      }

    std::unordered_map<std::string, int> goal_index;
    for (const json& jg : j.at("goals")) {
      GoalVertex g;
      g.location = find_location(inst, jg.at("location"), "goal location");
      if (jg.contains("time") && !jg.at("time").is_null()) g.time = jg.at("time").get<int>();
      g.type = type_index(jg.at("type").get<std::string>());
      std::string id = jg.value("id", "g" + std::to_string(inst.goals.size()));
      if (!goal_index.emplace(id, (int)inst.goals.size()).second)
        bail("duplicate goal id \"" + id + "\"");
      inst.goals.push_back(g);
    }

    for (const json& ja : j.at("agents")) {
      Agent a;
      a.id = ja.at("id").get<std::string>();
      a.type = type_index(ja.at("type").get<std::string>());
      const json& jr = ja.at("arrival");
      a.arrival_loc = find_location(inst, jr.at("location"), "agent " + a.id + " arrival");
      a.arrival_time = jr.value("time", 0);
      if (jr.contains("direction") && !jr.at("direction").is_null())
        a.arrival_dir = parse_dir(jr.at("direction"), "agent " + a.id + " arrival direction");
      if (ja.contains("tasks"))
        for (const json& jt : ja.at("tasks")) {
          ServiceTask t;
          t.id = jt.value("id", a.id + ".task" + std::to_string(a.tasks.size()));
          t.kind = jt.at("kind").get<std::string>();
          for (const json& jl : jt.at("locations"))
            t.locations.push_back(find_location(inst, jl, "task " + t.id + " location"));
          t.duration = jt.value("duration", 1);
          a.tasks.push_back(std::move(t));
        }
      if (ja.contains("goal") && !ja.at("goal").is_null()) {
        std::string gid = ja.at("goal").get<std::string>();
        auto it = goal_index.find(gid);
        if (it == goal_index.end()) bail("agent " + a.id + ": unknown goal id \"" + gid + "\"");
        a.fixed_goal = it->second;
      }
      inst.agents.push_back(std::move(a));
    }

    inst.finalize();
    return inst;
  } catch (const json::exception& e) {
    bail(std::string("malformed instance: ") + e.what());
  }
}

json instance_to_json(const Instance& inst) {
  json j;
  j["name"] = inst.name;

  json locs = json::array();
  for (const LocationInfo& info : inst.graph.locations) {
    json jl;
    jl["name"] = info.name;
    jl["reversible"] = info.reversible;
    jl["no_parking"] = info.no_parking;
    if (!info.task_kinds.empty()) jl["task_kinds"] = info.task_kinds;
    locs.push_back(std::move(jl));
  }
  json edges = json::array();
  for (const TrackGraph::Edge& e : inst.graph.edges) {
    json je;
    je["u"] = inst.graph.locations[e.u].name;
    je["v"] = inst.graph.locations[e.v].name;
    je["side_u"] = to_string(e.side_u);
    je["side_v"] = to_string(e.side_v);
    edges.push_back(std::move(je));
  }
  j["yard"] = {{"locations", std::move(locs)}, {"edges", std::move(edges)}};

  j["types"] = inst.types;
  j["mode"] = {{"matching", inst.mode.matching},
               {"directions", inst.mode.directions},
               {"services", inst.mode.services},
               {"timed", inst.mode.timed}};
  json costs;
  costs["move"] = inst.costs.move_cost;
  costs["reversal"] = inst.costs.reversal_cost;
  if (inst.costs.wait_cost) costs["wait"] = *inst.costs.wait_cost;
  j["costs"] = std::move(costs);
  j["horizon"] = inst.horizon;
  if (inst.max_dwell) j["max_dwell"] = *inst.max_dwell;

  json goals = json::array();
  for (size_t i = 0; i < inst.goals.size(); ++i) {
    const GoalVertex& g = inst.goals[i];
    json jg;
    jg["id"] = "g" + std::to_string(i);
    jg["location"] = inst.graph.locations[g.location].name;
    if (g.time >= 0)
      jg["time"] = g.time;
    else
      jg["time"] = nullptr;
    jg["type"] = inst.types.at(g.type);
    goals.push_back(std::move(jg));
  }
  j["goals"] = std::move(goals);

  json agents = json::array();
  for (const Agent& a : inst.agents) {
    json ja;
    ja["id"] = a.id;
    ja["type"] = inst.types.at(a.type);
    json arr;
    arr["location"] = inst.graph.locations[a.arrival_loc].name;
    arr["time"] = a.arrival_time;
    if (a.arrival_dir) arr["direction"] = to_string(*a.arrival_dir);
    ja["arrival"] = std::move(arr);
    if (!a.tasks.empty()) {
      json jt = json::array();
      for (const ServiceTask& t : a.tasks) {
        json x;
        x["id"] = t.id;
        x["kind"] = t.kind;
        json xs = json::array();
        for (Loc l : t.locations) xs.push_back(inst.graph.locations[l].name);
        x["locations"] = std::move(xs);
        x["duration"] = t.duration;
        jt.push_back(std::move(x));
      }
      ja["tasks"] = std::move(jt);
    }
    if (a.fixed_goal >= 0) ja["goal"] = "g" + std::to_string(a.fixed_goal);
    agents.push_back(std::move(ja));
  }
  j["agents"] = std::move(agents);
  return j;
}

Instance load_instance(const std::string& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::exception& e) {
    bail(path + ": " + e.what());
  }
  std::string base = path;
  if (auto slash = base.find_last_of('/'); slash != std::string::npos) base = base.substr(slash + 1);
  if (auto dot = base.find_last_of('.'); dot != std::string::npos) base = base.substr(0, dot);
  return instance_from_json(j, base);
}

void save_instance(const Instance& inst, const std::string& path) {
  write_file(path, instance_to_json(inst).dump(2) + "\n");
}

json solution_to_json(const Instance& inst, std::span<const Path> paths) {
  std::vector<const Path*> order;
  for (const Path& p : paths) order.push_back(&p);
  std::sort(order.begin(), order.end(),
            [](const Path* a, const Path* b) { return a->agent < b->agent; });

  json j;
  j["instance"] = inst.name;
  double total = 0.0;
  json arr = json::array();
  for (const Path* p : order) {
    json jp;
    jp["agent"] = inst.agents.at(p->agent).id;
    jp["goal"] = p->goal;
    jp["cost"] = p->cost;
    json steps = json::array();
    for (const SearchState& s : p->states) {
      json st;
      st["t"] = s.t;
      st["location"] = inst.graph.locations[s.loc].name;
      if (inst.mode.directions) st["direction"] = to_string((Dir)s.dir);
      steps.push_back(std::move(st));
    }
    jp["steps"] = std::move(steps);
    total += p->cost;
    arr.push_back(std::move(jp));
  }
  j["paths"] = std::move(arr);
  j["cost"] = total;
  return j;
}

std::vector<Path> solution_from_json(const Instance& inst, const json& j) {
  try {
    std::vector<Path> out;
    for (const json& jp : j.at("paths")) {
      Path p;
      std::string aid = jp.at("agent").get<std::string>();
      p.agent = -1;
      for (size_t i = 0; i < inst.agents.size(); ++i)
        if (inst.agents[i].id == aid) p.agent = (int)i;
      if (p.agent < 0) bail("solution references unknown agent \"" + aid + "\"");
      p.goal = jp.at("goal").get<int>();
      p.cost = jp.value("cost", 0.0);
      for (const json& js : jp.at("steps")) {
        SearchState s;
        s.t = js.at("t").get<int>();
        s.loc = find_location(inst, js.at("location"), "step location");
        s.dir = -1;
        if (inst.mode.directions) s.dir = (int8_t)parse_dir(js.at("direction"), "step direction");
        p.states.push_back(s);
      }
      out.push_back(std::move(p));
    }
    return out;
  } catch (const json::exception& e) {
    bail(std::string("malformed solution: ") + e.what());
  }
}

std::vector<Path> load_solution(const Instance& inst, const std::string& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::exception& e) {
    bail(path + ": " + e.what());
  }
  return solution_from_json(inst, j);
}

json outcome_to_json(const Instance& inst, const Outcome& outcome, bool include_timing) {
  json j;
  j["instance"] = inst.name;
  j["engine"] = outcome.engine;
  j["status"] = to_string(outcome.status);
  j["decision"] = outcome.decision;
  j["horizon"] = outcome.horizon;
  if (outcome.cost)
    j["cost"] = *outcome.cost;
  else
    j["cost"] = nullptr;
  if (outcome.lower_bound)
    j["lower_bound"] = *outcome.lower_bound;
  else
    j["lower_bound"] = nullptr;
  j["stats"] = {{"high_level_expanded", outcome.stats.high_level_expanded},
                {"low_level_expanded", outcome.stats.low_level_expanded},
                {"assignments_tried", outcome.stats.assignments_tried},
                {"runtime_ms", include_timing ? outcome.stats.runtime_ms : 0.0}};
  if (!outcome.solution.empty())
    j["solution"] = solution_to_json(inst, outcome.solution);
  else
    j["solution"] = nullptr;
  return j;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) bail("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) bail("cannot write " + path);
  out << text;
  if (!out.flush()) bail("write failed: " + path);
}

}  // namespace shuntbound
