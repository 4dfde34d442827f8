#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "shuntbound/assignment.hpp"

using namespace shuntbound;

namespace {

// Ground truth by permutation sweep: every finite bijection with its cost.
std::vector<AssignmentSolution> all_assignments(const std::vector<std::vector<double>>& cost) {
  const int n = (int)cost.size();
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<AssignmentSolution> out;
  do {
    double c = 0.0;
    bool ok = true;
    for (int i = 0; i < n && ok; ++i) {
      if (std::isinf(cost[i][perm[i]])) ok = false;
      c += cost[i][perm[i]];
    }
    if (ok) out.push_back({perm, c});
  } while (std::next_permutation(perm.begin(), perm.end()));
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    if (a.cost != b.cost) return a.cost < b.cost;
    return a.goal_of_agent < b.goal_of_agent;
  });
  return out;
}

std::vector<std::vector<double>> random_matrix(std::mt19937_64& rng, int n, double forbid_p) {
  std::uniform_int_distribution<int> val(0, 9);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::vector<std::vector<double>> m(n, std::vector<double>(n));
  for (auto& row : m)
    for (auto& x : row) x = coin(rng) < forbid_p ? kForbidden : (double)val(rng);
  return m;
}

}  // namespace

TEST_CASE("min_cost_assignment on pinned matrices") {
  SUBCASE("3x3 with a unique optimum") {
    std::vector<std::vector<double>> m = {{4, 1, 3}, {2, 0, 5}, {3, 2, 2}};
    auto sol = min_cost_assignment(m);
    REQUIRE(sol);
    CHECK(sol->cost == 5.0);
    CHECK(sol->goal_of_agent == std::vector<int>({1, 0, 2}));
  }
  SUBCASE("forbidden entries steer the matching") {
    std::vector<std::vector<double>> m = {{kForbidden, 1}, {1, kForbidden}};
    auto sol = min_cost_assignment(m);
    REQUIRE(sol);
    CHECK(sol->cost == 2.0);
    CHECK(sol->goal_of_agent == std::vector<int>({1, 0}));
  }
  SUBCASE("a fully forbidden row means no matching") {
    std::vector<std::vector<double>> m = {{kForbidden, kForbidden}, {1, 1}};
    CHECK(!min_cost_assignment(m));
  }
  SUBCASE("empty matrix matches trivially") {
    auto sol = min_cost_assignment({});
    REQUIRE(sol);
    CHECK(sol->cost == 0.0);
    CHECK(sol->goal_of_agent.empty());
  }
}

TEST_CASE("min_cost_assignment agrees with the permutation sweep") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 300; ++trial) {
    int n = 1 + (int)(rng() % 6);
    double forbid_p = (trial % 3 == 0) ? 0.4 : 0.0;
    auto m = random_matrix(rng, n, forbid_p);
    auto truth = all_assignments(m);
    auto sol = min_cost_assignment(m);
    if (truth.empty()) {
      CHECK(!sol);
    } else {
      REQUIRE(sol);
      CHECK(sol->cost == doctest::Approx(truth.front().cost));
      // The reported bijection must actually realize the reported cost.
      double realized = 0.0;
      for (int i = 0; i < n; ++i) realized += m[i][sol->goal_of_agent[i]];
      CHECK(realized == doctest::Approx(sol->cost));
    }
  }
}

TEST_CASE("AssignmentEnumerator yields every bijection once, sorted by (cost, lex)") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 120; ++trial) {
    int n = 1 + (int)(rng() % 4);
    double forbid_p = (trial % 4 == 0) ? 0.35 : 0.0;
    auto m = random_matrix(rng, n, forbid_p);
    auto truth = all_assignments(m);

    AssignmentEnumerator en(m);
    std::vector<AssignmentSolution> got;
    while (auto s = en.next()) got.push_back(*s);

    REQUIRE(got.size() == truth.size());
    for (size_t k = 0; k < truth.size(); ++k) {
      CHECK(got[k].cost == doctest::Approx(truth[k].cost));
      CHECK(got[k].goal_of_agent == truth[k].goal_of_agent);
    }
  }
}

TEST_CASE("AssignmentEnumerator is exhausted exactly once") {
  AssignmentEnumerator en(std::vector<std::vector<double>>{{1.0}});
  auto first = en.next();
  REQUIRE(first);
  CHECK(first->cost == 1.0);
  CHECK(!en.next());
  CHECK(!en.next());
}
