#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace shuntbound {

using Loc = int32_t;

enum class Dir : uint8_t { Left = 0, Right = 1 };

inline Dir opposite(Dir d) { return d == Dir::Left ? Dir::Right : Dir::Left; }
const char* to_string(Dir d);
std::optional<Dir> dir_from_string(const std::string& s);

/// Edge costs. wait_cost is an optional override: when unset the effective
/// value is 1 in classic mode and 0 in timed mode (where total elapsed time
/// is fixed by the arrival/departure vertices and waiting carries no
/// information).
struct CostModel {
  double move_cost = 1.0;
  std::optional<double> wait_cost;
  double reversal_cost = 0.0;

  double wait(bool timed) const { return wait_cost ? *wait_cost : (timed ? 0.0 : 1.0); }
};

struct ModeFlags {
  bool matching = false;
  bool directions = false;
  bool services = false;
  bool timed = false;

  bool operator==(const ModeFlags&) const = default;
};

// ---------------------------------------------------------------------------
// Yard description (physical tracks) and its discretized location graph.

struct TrackSpec {
  std::string id;
  double length_m = 0.0;
  bool reversible = true;
  bool no_parking = false;
};

struct ConnectionSpec {
  std::string track_a;
  Dir end_a = Dir::Right;
  std::string track_b;
  Dir end_b = Dir::Left;
};

struct ServicePointSpec {
  std::string track;
  std::string kind;
};

struct YardSpec {
  double min_train_length_m = 0.0;
  std::vector<TrackSpec> tracks;
  std::vector<ConnectionSpec> connections;
  std::vector<ServicePointSpec> service_points;
};

struct LocationInfo {
  std::string name;
  int track = -1;  // originating track index, -1 for direct location graphs
  bool reversible = true;
  bool no_parking = false;
  std::vector<std::string> task_kinds;  // sorted
};

/// Undirected location graph. Every edge records the side (left/right end)
/// it attaches to at each endpoint; the direction-split transform needs
/// the sides to orient its arcs. Waiting is part of the time expansion,
/// never a static edge, so self-loops are rejected at construction.
struct TrackGraph {
  struct Edge {
    Loc u = -1, v = -1;
    Dir side_u = Dir::Right;  // edge leaves u via this side
    Dir side_v = Dir::Left;   // and enters v at this side
  };

  std::vector<LocationInfo> locations;
  std::vector<Edge> edges;
  std::vector<std::vector<Loc>> adj;  // sorted neighbor lists
  std::unordered_map<std::string, Loc> by_name;

  Loc find(const std::string& name) const;
  bool allows_task(Loc l, const std::string& kind) const;
  bool connected() const;
  void rebuild_adjacency();

  /// Plain-text adjacency dump for debugging.
  std::string dump() const;
};

/// Direction-split graph: each location yields two directional nodes, one
/// per direction of motion. Movement arcs keep the direction of motion;
/// reversal arcs join the two nodes of a reversible location. The node
/// pair of one location shares a single unit of capacity.
struct DirectedYardGraph {
  int n_locations = 0;
  std::vector<std::vector<int32_t>> move_out;  // indexed by directional node
  std::vector<uint8_t> reversible;             // per location

  static int32_t node(Loc l, Dir d) { return l * 2 + static_cast<int32_t>(d); }
  static Loc loc_of(int32_t n) { return n / 2; }
  static Dir dir_of(int32_t n) { return static_cast<Dir>(n & 1); }
};

// ---------------------------------------------------------------------------
// Agents, tasks, goals.

/// A service requirement: dwell at one location out of `locations` for
/// `duration` consecutive time steps.
struct ServiceTask {
  std::string id;
  std::string kind;
  std::vector<Loc> locations;  // sorted, nonempty
  int duration = 1;
};

struct Agent {
  std::string id;
  int type = 0;
  Loc arrival_loc = 0;
  int arrival_time = 0;
  std::optional<Dir> arrival_dir;  // directions mode; unset = either rail
  std::vector<ServiceTask> tasks;
  int fixed_goal = -1;  // classic mode: index into Instance::goals
};

/// A typed departure slot. time < 0 marks an untimed classic goal (the agent
/// rests there after its final arrival).
struct GoalVertex {
  Loc location = 0;
  int time = -1;
  int type = 0;
};

/// All-pairs distance tables, filled by Instance::finalize().
struct DistanceTables {
  std::vector<std::vector<int>> loc_hops;        // undirected hop counts, -1 unreachable
  std::vector<std::vector<double>> dnode_cost;   // directional, move/reversal weighted
  std::vector<std::vector<int>> dnode_steps;     // directional, unit steps per arc
};

struct Instance {
  std::string name = "instance";
  TrackGraph graph;
  std::optional<DirectedYardGraph> dgraph;  // built iff mode.directions
  std::vector<std::string> types;
  std::vector<Agent> agents;
  std::vector<GoalVertex> goals;
  CostModel costs;
  ModeFlags mode;
  int horizon = 0;
  std::optional<int> max_dwell;  // consecutive wait cap at no-parking locations

  DistanceTables dist;
  int run_cap = 1;  // dwell counter saturation point

  double wait_cost() const { return costs.wait(mode.timed); }

  /// Active service tasks of an agent; empty when services mode is off.
  std::span<const ServiceTask> tasks_of(int agent) const;

  /// Builds the split graph and distance tables. Must be called after
  /// construction and before any search; instances are immutable afterwards.
  void finalize();
};

// ---------------------------------------------------------------------------
// Validation and the relaxation ladder.

struct ValidationIssue {
  std::string code;
  std::string message;
};

struct ValidationReport {
  std::vector<ValidationIssue> errors;
  std::vector<ValidationIssue> warnings;

  bool ok() const { return errors.empty(); }
  std::string summary() const;
};

ValidationReport validate_instance(const Instance& instance);

inline constexpr int kRelaxLevels = 4;

/// Relaxation ladder. Level 0: one type, arrivals at 0, anonymous goals at
/// T_max, no directions, no services. Level 1 restores types and arrival /
/// departure times. Level 2 restores the direction split. Level 3 is the
/// unchanged instance. Each level's feasible set contains the next one's.
Instance relax_instance(const Instance& instance, int level);

}  // namespace shuntbound
