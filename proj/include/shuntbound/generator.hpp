#pragma once

#include <cstdint>

#include "shuntbound/model.hpp"

namespace shuntbound {

/// Generator knobs. Documented ranges: 1 <= n_tracks <= 32,
/// 0 <= n_agents <= 16, 1 <= n_types <= n_agents (or 1 when n_agents is 0),
/// 0 <= tasks_per_agent <= 3, horizon large enough for the yard (the
/// generator errors out otherwise rather than emit unusable instances).
struct GenParams {
  int n_tracks = 3;
  int n_agents = 2;
  int n_types = 1;
  int tasks_per_agent = 0;
  int horizon = 20;
  bool directions = true;
  bool with_classic_goals = false;  // also pin each agent's own goal (classic runs)
  // With staggered_times, arrivals and departures are spread over the
  // horizon. Off, everyone is present for the whole window (arrivals at 0,
  // departures at the horizon), which keeps every relaxation level of the
  // instance a true restriction of the next: extended presence can otherwise
  // turn a looser level infeasible on narrow yards.
  bool staggered_times = false;
};

/// Deterministic pseudo-random instance: connected yard, balanced type
/// counts, pairwise-distinct arrival and goal locations, reachable service
/// points. Same seed, same instance. Throws std::invalid_argument when the
/// parameter combination cannot be satisfied.
Instance generate_instance(uint64_t seed, const GenParams& params);

}  // namespace shuntbound
