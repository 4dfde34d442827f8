#include "shuntbound/generator.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <stdexcept>

namespace shuntbound {

namespace {

int pick(std::mt19937_64& rng, int n) { return (int)(rng() % (uint64_t)n); }

std::vector<int> sample_distinct(std::mt19937_64& rng, int n, int k) {
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  for (int i = 0; i < k; ++i) std::swap(idx[i], idx[i + pick(rng, n - i)]);
  idx.resize(k);
  return idx;
}

Instance build_candidate(std::mt19937_64& rng, const GenParams& p) {
  Instance inst;
  const int L = p.n_tracks;

  for (int i = 0; i < L; ++i) {
    LocationInfo info;
    info.name = "t" + std::to_string(i);
    inst.graph.locations.push_back(std::move(info));
  }
  // spanning tree, then up to two chords
  auto rand_dir = [&] { return pick(rng, 2) ? Dir::Right : Dir::Left; };
  for (int i = 1; i < L; ++i)
    inst.graph.edges.push_back({(Loc)pick(rng, i), (Loc)i, rand_dir(), rand_dir()});
  for (int extra = pick(rng, 3); extra > 0 && L > 2; --extra) {
    Loc u = (Loc)pick(rng, L), v = (Loc)pick(rng, L);
    if (u == v) continue;
    bool dup = false;
    for (const auto& e : inst.graph.edges)
      if ((e.u == u && e.v == v) || (e.u == v && e.v == u)) dup = true;
    if (!dup) inst.graph.edges.push_back({u, v, rand_dir(), rand_dir()});
  }
  inst.graph.rebuild_adjacency();
  for (Loc l = 0; l < L; ++l) {
    bool leaf = inst.graph.adj[l].size() <= 1;
    inst.graph.locations[l].reversible = leaf || pick(rng, 2) == 0;
  }

  inst.mode.matching = !p.with_classic_goals;
  inst.mode.timed = !p.with_classic_goals;
  inst.mode.directions = p.directions;
  inst.mode.services = p.tasks_per_agent > 0;
  inst.horizon = p.horizon;
  inst.costs.move_cost = 1.0;
  inst.costs.reversal_cost = p.directions ? 1.0 : 0.0;

  const int n_types = p.n_agents == 0 ? 1 : p.n_types;
  for (int k = 0; k < n_types; ++k) inst.types.push_back("type" + std::to_string(k));

  // service kinds and where they are offered
  std::vector<std::string> kinds;
  std::vector<std::vector<Loc>> kind_locs;
  if (inst.mode.services) {
    int n_kinds = std::min(3, p.tasks_per_agent);
    for (int k = 0; k < n_kinds; ++k) {
      kinds.push_back("svc" + std::to_string(k));
      auto marked = sample_distinct(rng, L, std::min(2, L));
      std::vector<Loc> locs;
      for (int m : marked) {
        inst.graph.locations[m].task_kinds.push_back(kinds.back());
        locs.push_back((Loc)m);
      }
      std::sort(locs.begin(), locs.end());
      kind_locs.push_back(std::move(locs));
    }
    for (auto& info : inst.graph.locations)
      std::sort(info.task_kinds.begin(), info.task_kinds.end());
  }

  auto arrivals = sample_distinct(rng, L, p.n_agents);
  auto goal_locs = sample_distinct(rng, L, p.n_agents);

  for (int i = 0; i < p.n_agents; ++i) {
    GoalVertex g;
    g.location = (Loc)goal_locs[i];
    g.type = i % n_types;
    if (inst.mode.timed)
      g.time = p.staggered_times ? p.horizon - pick(rng, std::max(1, p.horizon / 3)) : p.horizon;
    inst.goals.push_back(g);
  }

  for (int i = 0; i < p.n_agents; ++i) {
    Agent a;
    a.id = "u" + std::to_string(i);
    a.type = i % n_types;
    a.arrival_loc = (Loc)arrivals[i];
    a.arrival_time = p.staggered_times ? pick(rng, std::max(1, p.horizon / 3)) : 0;
    if (p.directions) {
      int d = pick(rng, 3);
      if (d == 1) a.arrival_dir = Dir::Left;
      if (d == 2) a.arrival_dir = Dir::Right;
    }
    for (int t = 0; t < p.tasks_per_agent; ++t) {
      ServiceTask task;
      int k = pick(rng, (int)kinds.size());
      task.id = a.id + ".s" + std::to_string(t);
      task.kind = kinds[k];
      const auto& offer = kind_locs[k];
      if ((int)offer.size() >= 2 && pick(rng, 2)) {
        task.locations = {offer[0], offer[1]};
      } else {
        task.locations = {offer[pick(rng, (int)offer.size())]};
      }
      task.duration = 1 + pick(rng, 3);
      a.tasks.push_back(std::move(task));
    }
    if (p.with_classic_goals) a.fixed_goal = i;
    inst.agents.push_back(std::move(a));
  }

  inst.finalize();
  return inst;
}

}  // namespace

Instance generate_instance(uint64_t seed, const GenParams& p) {
  if (p.n_tracks < 1 || p.n_tracks > 32) throw std::invalid_argument("n_tracks out of range");
  if (p.n_agents < 0 || p.n_agents > 16) throw std::invalid_argument("n_agents out of range");
  if (p.n_agents > p.n_tracks)
    throw std::invalid_argument("need at least one location per agent");
  if (p.n_types < 1 || (p.n_agents > 0 && p.n_types > p.n_agents))
    throw std::invalid_argument("n_types out of range");
  if (p.tasks_per_agent < 0 || p.tasks_per_agent > 3)
    throw std::invalid_argument("tasks_per_agent out of range");
  if (p.horizon < 2) throw std::invalid_argument("horizon too short");

  std::mt19937_64 rng(seed * 0x9e3779b97f4a7c15ULL + 0xd1b54a32d192ed03ULL);
  for (int attempt = 0; attempt < 64; ++attempt) {
    Instance inst = build_candidate(rng, p);
    inst.name = "gen-" + std::to_string(seed);
    if (validate_instance(inst).ok()) return inst;
  }
  throw std::invalid_argument("generator: no admissible instance for these parameters");
}

}  // namespace shuntbound
