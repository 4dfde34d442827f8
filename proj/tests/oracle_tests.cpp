#include <doctest.h>

#include <random>
#include <stdexcept>
#include <vector>

#include "helpers.hpp"
#include "shuntbound/generator.hpp"
#include "shuntbound/oracle.hpp"
#include "shuntbound/solver.hpp"

using namespace shuntbound;
using namespace shuntbound::testing;

TEST_CASE("size guards refuse what the joint search cannot afford") {
  ModeFlags mode;
  Instance big = line_instance(13, mode, 6);
  for (int i = 0; i < 1; ++i) {
    Agent a = make_agent("u" + std::to_string(i), 0, i);
    a.fixed_goal = 0;
    big.agents.push_back(a);
  }
  big.goals.push_back(make_goal(12, -1));
  big.finalize();
  CHECK_THROWS_AS(brute_force(big), std::invalid_argument);

  Instance crowd = line_instance(6, mode, 6);
  for (int i = 0; i < 4; ++i) {
    Agent a = make_agent("u" + std::to_string(i), 0, i);
    a.fixed_goal = i;
    crowd.agents.push_back(a);
    crowd.goals.push_back(make_goal(i, -1));
  }
  crowd.finalize();
  CHECK_THROWS_AS(brute_force(crowd), std::invalid_argument);

  Instance late = line_instance(3, mode, 13);
  Agent a = make_agent("u0", 0, 0);
  a.fixed_goal = 0;
  late.agents.push_back(a);
  late.goals.push_back(make_goal(2, -1));
  late.finalize();
  CHECK_THROWS_AS(brute_force(late), std::invalid_argument);

  ModeFlags svc = mode;
  svc.services = true;
  Instance tasky = line_instance(3, svc, 8);
  tasky.graph.locations[1].task_kinds = {"clean"};
  Agent b = make_agent("u0", 0, 0);
  b.fixed_goal = 0;
  for (int k = 0; k < 5; ++k) b.tasks.push_back({"s" + std::to_string(k), "clean", {1}, 1});
  tasky.agents.push_back(b);
  tasky.goals.push_back(make_goal(2, -1));
  tasky.finalize();
  CHECK_THROWS_AS(brute_force(tasky), std::invalid_argument);
}

TEST_CASE("hand-checkable ground truths") {
  SUBCASE("one hop") {
    ModeFlags mode;
    Instance inst = line_instance(2, mode, 4);
    Agent a = make_agent("u0", 0, 0);
    a.fixed_goal = 0;
    inst.agents.push_back(a);
    inst.goals.push_back(make_goal(1, -1));
    inst.finalize();
    Outcome o = brute_force(inst);
    REQUIRE(o.status == Status::Optimal);
    CHECK(*o.cost == 1.0);
    REQUIRE(o.solution.size() == 1);
    CHECK(validate_solution(inst, o.solution).pass());
  }
  SUBCASE("stay put for free in a timed window") {
    ModeFlags mode;
    mode.matching = true;
    mode.timed = true;
    Instance inst = line_instance(2, mode, 5);
    inst.agents.push_back(make_agent("u0", 0, 1));
    inst.goals.push_back(make_goal(1, 5));
    inst.finalize();
    Outcome o = brute_force(inst);
    REQUIRE(o.status == Status::Optimal);
    CHECK(*o.cost == 0.0);
  }
  SUBCASE("a two-step service dwell on the way through") {
    ModeFlags mode;
    mode.services = true;
    Instance inst = line_instance(3, mode, 8);
    inst.graph.locations[1].task_kinds = {"clean"};
    Agent a = make_agent("u0", 0, 0);
    a.fixed_goal = 0;
    a.tasks = {{"s0", "clean", {1}, 2}};
    inst.agents.push_back(a);
    inst.goals.push_back(make_goal(2, -1));
    inst.finalize();
    Outcome truth = brute_force(inst);
    REQUIRE(truth.status == Status::Optimal);
    CHECK(*truth.cost == 3.0);  // two moves and the single extra dwell step
    Outcome got = solve(inst);
    REQUIRE(got.status == Status::Optimal);
    CHECK(*got.cost == 3.0);
    CHECK(validate_solution(inst, truth.solution).pass());
  }
}

TEST_CASE("a dwell cap reprices the crossing") {
  // Timed corridor where nobody may pause: the exact-time arrival forces a
  // shuttle dance, and one step of allowed dwell removes it again.
  auto build = [](int cap) {
    ModeFlags mode;
    mode.matching = true;
    mode.timed = true;
    Instance inst = line_instance(3, mode, 4);
    for (auto& l : inst.graph.locations) l.no_parking = true;
    inst.max_dwell = cap;
    inst.agents.push_back(make_agent("u0", 0, 0));
    inst.goals.push_back(make_goal(2, 4));
    inst.finalize();
    return inst;
  };

  Instance strict = build(0);
  Outcome o0 = solve(strict);
  Outcome t0 = brute_force(strict);
  REQUIRE(o0.status == Status::Optimal);
  REQUIRE(t0.status == Status::Optimal);
  CHECK(*o0.cost == 4.0);  // must keep rolling: l0 l1 l0 l1 l2
  CHECK(*t0.cost == 4.0);

  Instance lax = build(1);
  Outcome o1 = solve(lax);
  Outcome t1 = brute_force(lax);
  REQUIRE(o1.status == Status::Optimal);
  CHECK(*o1.cost == 2.0);  // one pause per visit suffices
  CHECK(*t1.cost == 2.0);
}

TEST_CASE("oracle solutions satisfy the solver-side validator") {
  for (uint64_t seed = 200; seed < 215; ++seed) {
    GenParams p;
    p.n_tracks = 5;
    p.n_agents = 2;
    p.n_types = 1 + (int)(seed % 2);
    p.tasks_per_agent = (int)(seed % 3);
    p.horizon = 8;
    p.directions = seed % 2 == 0;
    p.staggered_times = seed % 4 == 0;
    Instance inst = generate_instance(seed, p);
    Outcome truth = brute_force(inst);
    if (truth.status != Status::Optimal) continue;
    INFO("seed ", seed);
    auto rep = validate_solution(inst, truth.solution);
    for (const auto& v : rep.violations) INFO(v);
    CHECK(rep.pass());
    CHECK(rep.recomputed_cost == doctest::Approx(*truth.cost));
    CHECK(detect_conflicts(inst, truth.solution).empty());
    CHECK(trajectory_legal(inst, truth.solution));
  }
}

TEST_CASE("both conflict detectors agree on random walks") {
  ModeFlags mode;
  Instance inst = line_instance(4, mode, 6);
  inst.agents.push_back(make_agent("u0", 0, 0));
  inst.agents.push_back(make_agent("u1", 0, 3));
  inst.agents[0].fixed_goal = 0;
  inst.agents[1].fixed_goal = 1;
  inst.goals.push_back(make_goal(3, -1));
  inst.goals.push_back(make_goal(0, -1));
  inst.finalize();

  std::mt19937_64 rng(99);
  auto random_walk = [&](int agent, Loc from, int len) {
    Path p;
    p.agent = agent;
    p.goal = agent;
    Loc at = from;
    for (int t = 0; t <= len; ++t) {
      SearchState s;
      s.loc = at;
      s.t = t;
      p.states.push_back(s);
      const auto& nb = inst.graph.adj[at];
      int pick = (int)(rng() % (nb.size() + 1));
      if (pick < (int)nb.size()) at = nb[pick];
    }
    return p;
  };

  int clashes = 0, clean = 0;
  for (int trial = 0; trial < 400; ++trial) {
    std::vector<Path> paths = {random_walk(0, 0, (int)(rng() % 6)),
                               random_walk(1, 3, (int)(rng() % 6))};
    bool a = detect_conflicts(inst, paths).empty();
    bool b = trajectory_legal(inst, paths);
    CHECK(a == b);
    (a ? clean : clashes)++;
  }
  CHECK(clashes > 50);  // the sample must contain real collisions
  CHECK(clean > 50);    // and real non-collisions
}

TEST_CASE("validator rejects a dwell cut one step short") {
  ModeFlags mode;
  mode.services = true;
  Instance inst = line_instance(3, mode, 8);
  inst.graph.locations[1].task_kinds = {"clean"};
  Agent a = make_agent("u0", 0, 0);
  a.fixed_goal = 0;
  a.tasks = {{"s0", "clean", {1}, 2}};
  inst.agents.push_back(a);
  inst.goals.push_back(make_goal(2, -1));
  inst.finalize();

  // Straight drive: only one step at l1, needs two.
  Path p;
  p.agent = 0;
  p.goal = 0;
  for (int t = 0; t < 3; ++t) {
    SearchState s;
    s.loc = (Loc)t;
    s.t = t;
    s.run = 1;
    p.states.push_back(s);
  }
  p.cost = 2.0;
  auto rep = validate_solution(inst, std::vector<Path>{p});
  CHECK(!rep.pass());
}
