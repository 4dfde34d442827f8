#include <doctest.h>

#include <algorithm>

#include "helpers.hpp"
#include "shuntbound/graph.hpp"
#include "shuntbound/model.hpp"

using namespace shuntbound;
using namespace shuntbound::testing;

namespace {

bool has_error(const ValidationReport& r, const std::string& code) {
  return std::any_of(r.errors.begin(), r.errors.end(),
                     [&](const ValidationIssue& e) { return e.code == code; });
}

}  // namespace

TEST_CASE("wait cost defaults per mode, override wins") {
  CostModel c;
  CHECK(c.wait(true) == 0.0);
  CHECK(c.wait(false) == 1.0);
  c.wait_cost = 2.5;
  CHECK(c.wait(true) == 2.5);
  CHECK(c.wait(false) == 2.5);
}

TEST_CASE("direction names round-trip") {
  CHECK(dir_from_string(to_string(Dir::Left)) == Dir::Left);
  CHECK(dir_from_string(to_string(Dir::Right)) == Dir::Right);
  CHECK(!dir_from_string("sideways").has_value());
}

TEST_CASE("discretize_yard chops tracks and joins ends") {
  YardSpec spec;
  spec.min_train_length_m = 30.0;
  spec.tracks.push_back({"A", 90.0, true, false});
  spec.tracks.push_back({"B", 25.0, false, true});
  spec.connections.push_back({"A", Dir::Right, "B", Dir::Left});
  spec.service_points.push_back({"B", "clean"});

  TrackGraph g = discretize_yard(spec);
  REQUIRE(g.locations.size() == 4);  // ceil(90/30)=3 plus ceil(25/30)=1
  CHECK(g.locations[0].name == "A:0");
  CHECK(g.locations[2].name == "A:2");
  CHECK(g.locations[3].name == "B:0");
  CHECK(g.locations[3].reversible == false);
  CHECK(g.locations[3].no_parking == true);
  CHECK(g.allows_task(3, "clean"));
  CHECK(!g.allows_task(0, "clean"));

  // chain A:0-A:1-A:2 and the joint A:2-B:0
  CHECK(g.adj[0] == std::vector<Loc>{1});
  CHECK(g.adj[2] == std::vector<Loc>({1, 3}));
  CHECK(g.find("B:0") == 3);
  CHECK(g.find("nope") == -1);
}

TEST_CASE("discretize_yard drops duplicate connections, rejects bad specs") {
  YardSpec spec;
  spec.min_train_length_m = 10.0;
  spec.tracks.push_back({"A", 10.0, true, false});
  spec.tracks.push_back({"B", 10.0, true, false});
  spec.connections.push_back({"A", Dir::Right, "B", Dir::Left});
  spec.connections.push_back({"B", Dir::Left, "A", Dir::Right});  // same joint, reversed
  TrackGraph g = discretize_yard(spec);
  CHECK(g.edges.size() == 1);

  YardSpec dup = spec;
  dup.tracks.push_back({"A", 5.0, true, false});
  CHECK_THROWS_AS(discretize_yard(dup), std::invalid_argument);

  YardSpec island = spec;
  island.tracks.push_back({"C", 10.0, true, false});
  CHECK_THROWS_AS(discretize_yard(island), std::invalid_argument);

  YardSpec selfloop;
  selfloop.min_train_length_m = 10.0;
  selfloop.tracks.push_back({"A", 10.0, true, false});
  selfloop.connections.push_back({"A", Dir::Left, "A", Dir::Right});
  CHECK_THROWS_AS(discretize_yard(selfloop), std::invalid_argument);
}

TEST_CASE("finalize sorts task locations and sizes the run counter") {
  ModeFlags mode;
  mode.services = true;
  Instance inst = line_instance(4, mode, 10);
  Agent a = make_agent("u0", 0, 0);
  a.fixed_goal = 0;
  ServiceTask task;
  task.id = "s0";
  task.kind = "clean";
  task.locations = {2, 1, 2};
  task.duration = 3;
  a.tasks.push_back(task);
  inst.agents.push_back(a);
  inst.goals.push_back(make_goal(3, -1));
  inst.finalize();

  CHECK(inst.agents[0].tasks[0].locations == std::vector<Loc>({1, 2}));
  CHECK(inst.run_cap == 3);
  CHECK(inst.tasks_of(0).size() == 1);

  inst.mode.services = false;
  inst.finalize();
  CHECK(inst.tasks_of(0).empty());
  CHECK(inst.run_cap == 1);

  inst.max_dwell = 2;
  inst.finalize();
  CHECK(inst.run_cap == 3);  // needs to distinguish runs up to max_dwell+1
}

TEST_CASE("validate_instance flags the classic error classes") {
  // Balanced, reachable, in-horizon baseline must be clean.
  ModeFlags mode;
  mode.matching = true;
  mode.timed = true;
  Instance base = line_instance(3, mode, 6);
  base.agents.push_back(make_agent("u0", 0, 0));
  base.goals.push_back(make_goal(2, 6));
  base.finalize();
  CHECK(validate_instance(base).ok());

  SUBCASE("type counts must balance") {
    Instance inst = base;
    inst.types = {"a", "b"};
    inst.goals[0].type = 1;
    inst.finalize();
    CHECK(has_error(validate_instance(inst), "type-count-mismatch"));
  }
  SUBCASE("negative costs rejected") {
    Instance inst = base;
    inst.costs.move_cost = -1.0;
    inst.finalize();
    CHECK(has_error(validate_instance(inst), "negative-cost"));
  }
  SUBCASE("goal beyond horizon") {
    Instance inst = base;
    inst.goals[0].time = 7;
    inst.finalize();
    CHECK(has_error(validate_instance(inst), "goal-beyond-horizon"));
  }
  SUBCASE("timed mode needs departure times") {
    Instance inst = base;
    inst.goals[0].time = -1;
    inst.finalize();
    CHECK(has_error(validate_instance(inst), "untimed-goal"));
  }
  SUBCASE("arrival beyond horizon") {
    Instance inst = base;
    inst.agents[0].arrival_time = 7;
    inst.finalize();
    CHECK(has_error(validate_instance(inst), "arrival-beyond-horizon"));
  }
  SUBCASE("fixed goal not allowed in matching mode") {
    Instance inst = base;
    inst.agents[0].fixed_goal = 0;
    inst.finalize();
    CHECK(has_error(validate_instance(inst), "fixed-goal-in-matching"));
  }
  SUBCASE("classic mode needs fixed goals, untimed") {
    Instance inst = base;
    inst.mode.matching = false;
    inst.finalize();
    auto rep = validate_instance(inst);
    CHECK(has_error(rep, "missing-fixed-goal"));
    CHECK(has_error(rep, "classic-timed"));
  }
  SUBCASE("fixed goal must type-match") {
    Instance inst = base;
    inst.mode.matching = false;
    inst.mode.timed = false;
    inst.types = {"a", "b"};
    inst.agents[0].fixed_goal = 0;
    inst.agents.push_back(make_agent("u1", 1, 1));
    inst.agents[1].fixed_goal = 1;
    inst.goals[0].time = -1;
    inst.goals.push_back(make_goal(0, -1, 0));  // type 0 goal for the type-1 agent
    inst.finalize();
    auto rep = validate_instance(inst);
    CHECK(has_error(rep, "fixed-goal-type"));
    CHECK(has_error(rep, "type-count-mismatch"));
  }
  SUBCASE("task kind must be offered at every listed location") {
    Instance inst = base;
    inst.mode.services = true;
    ServiceTask t;
    t.id = "s";
    t.kind = "clean";
    t.locations = {1};
    t.duration = 0;
    inst.agents[0].tasks.push_back(t);
    inst.finalize();
    auto rep = validate_instance(inst);
    CHECK(has_error(rep, "task-kind-mismatch"));
    CHECK(has_error(rep, "bad-task-duration"));
  }
}

TEST_CASE("relaxation ladder levels") {
  // Classic, directed, serviced base instance.
  ModeFlags mode;
  mode.directions = true;
  mode.services = true;
  Instance inst = line_instance(4, mode, 8);
  inst.types = {"a", "b"};
  inst.graph.locations[1].task_kinds = {"clean"};
  Agent a0 = make_agent("u0", 0, 0);
  a0.fixed_goal = 0;
  a0.arrival_dir = Dir::Right;
  ServiceTask t;
  t.id = "s";
  t.kind = "clean";
  t.locations = {1};
  t.duration = 2;
  a0.tasks.push_back(t);
  Agent a1 = make_agent("u1", 1, 3, 1);
  a1.fixed_goal = 1;
  inst.agents = {a0, a1};
  inst.goals = {make_goal(3, -1, 0), make_goal(0, -1, 1)};
  inst.finalize();

  CHECK_THROWS_AS(relax_instance(inst, -1), std::invalid_argument);
  CHECK_THROWS_AS(relax_instance(inst, 4), std::invalid_argument);

  Instance l0 = relax_instance(inst, 0);
  CHECK(l0.mode.matching);
  CHECK(l0.mode.timed);
  CHECK(!l0.mode.directions);
  CHECK(!l0.mode.services);
  CHECK(l0.types.size() == 1);
  for (const Agent& a : l0.agents) {
    CHECK(a.type == 0);
    CHECK(a.arrival_time == 0);
    CHECK(a.fixed_goal == -1);
    CHECK(a.tasks.empty());
    CHECK(!a.arrival_dir.has_value());
  }
  for (const GoalVertex& g : l0.goals) {
    CHECK(g.type == 0);
    CHECK(g.time == inst.horizon);
  }

  Instance l1 = relax_instance(inst, 1);
  CHECK(l1.types.size() == 2);
  CHECK(l1.agents[1].arrival_time == 1);
  CHECK(l1.agents[1].type == 1);
  CHECK(!l1.mode.directions);
  CHECK(l1.goals[0].time == inst.horizon);  // untimed classic goal pinned at T_max

  Instance l2 = relax_instance(inst, 2);
  CHECK(l2.mode.directions);
  CHECK(l2.agents[0].arrival_dir == Dir::Right);
  CHECK(!l2.mode.services);
  CHECK(l2.mode.matching);
  CHECK(l2.dgraph.has_value());

  Instance l3 = relax_instance(inst, 3);
  CHECK(l3.mode == inst.mode);
  CHECK(l3.agents[0].fixed_goal == 0);
  CHECK(l3.agents[0].tasks.size() == 1);

  // Idempotence: a level is a fixed point of its own relaxation.
  for (int lv = 0; lv < kRelaxLevels; ++lv) {
    Instance once = relax_instance(inst, lv);
    Instance twice = relax_instance(once, lv);
    CHECK(twice.mode == once.mode);
    CHECK(twice.types == once.types);
    CHECK(twice.goals.size() == once.goals.size());
    for (size_t i = 0; i < once.goals.size(); ++i) {
      CHECK(twice.goals[i].time == once.goals[i].time);
      CHECK(twice.goals[i].type == once.goals[i].type);
    }
  }

  // Type balance is preserved by every level.
  for (int lv = 0; lv < kRelaxLevels; ++lv) {
    Instance r = relax_instance(inst, lv);
    std::vector<int> ac(r.types.size(), 0), gc(r.types.size(), 0);
    for (const Agent& a : r.agents) ac[a.type]++;
    for (const GoalVertex& g : r.goals) gc[g.type]++;
    CHECK(ac == gc);
  }
}
