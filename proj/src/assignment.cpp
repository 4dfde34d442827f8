#include "shuntbound/assignment.hpp"

#include <algorithm>
#include <stdexcept>

namespace shuntbound {

namespace {

// Jonker-Volgenant shortest augmenting path. Forbidden entries are replaced
// by a finite surrogate larger than any complete finite matching, so the
// potentials stay well defined; a matching that still uses one is reported
// as "no perfect matching".
std::optional<AssignmentSolution> solve_matrix(const std::vector<std::vector<double>>& m) {
  const int n = (int)m.size();
  AssignmentSolution sol;
  sol.goal_of_agent.assign(n, -1);
  if (n == 0) return sol;

  double max_finite = 0.0;
  for (const auto& row : m) {
    if ((int)row.size() != n) throw std::invalid_argument("cost matrix is not square");
    for (double c : row)
      if (c < kForbidden) max_finite = std::max(max_finite, c);
  }
  const double big = (max_finite + 1.0) * (n + 1);
  auto at = [&](int i, int j) {
    double c = m[i][j];
    return c >= kForbidden ? big : c;
  };

  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, kForbidden);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      int i0 = p[j0], j1 = 0;
      double delta = kForbidden;
      for (int j = 1; j <= n; ++j)
        if (!used[j]) {
          double cur = at(i0 - 1, j - 1) - u[i0] - v[j];
          if (cur < minv[j]) {
            minv[j] = cur;
            way[j] = j0;
          }
          if (minv[j] < delta) {
            delta = minv[j];
            j1 = j;
          }
        }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }

  bool uses_forbidden = false;
  for (int j = 1; j <= n; ++j) {
    int i = p[j];
    sol.goal_of_agent[i - 1] = j - 1;
    if (m[i - 1][j - 1] >= kForbidden)
      uses_forbidden = true;
    else
      sol.cost += m[i - 1][j - 1];
  }
  if (uses_forbidden) return std::nullopt;
  return sol;
}

}  // namespace

std::optional<AssignmentSolution> min_cost_assignment(
    const std::vector<std::vector<double>>& cost) {
  return solve_matrix(cost);
}

AssignmentEnumerator::AssignmentEnumerator(std::vector<std::vector<double>> cost)
    : cost_(std::move(cost)) {
  if (auto root = solve_node({}, {})) open_.push(std::move(*root));
}

std::optional<AssignmentEnumerator::Node> AssignmentEnumerator::solve_node(
    std::vector<std::pair<int, int>> forced, std::vector<std::pair<int, int>> banned) const {
  const int n = (int)cost_.size();
  auto m = cost_;
  for (auto [i, j] : banned) m[i][j] = kForbidden;
  std::vector<int> forced_goal(n, -1);
  for (auto [i, j] : forced) forced_goal[i] = j;
  for (int i = 0; i < n; ++i)
    if (forced_goal[i] >= 0)
      for (int j = 0; j < n; ++j)
        if (j != forced_goal[i]) m[i][j] = kForbidden;

  auto base = solve_matrix(m);
  if (!base) return std::nullopt;
  const double optimum = base->cost;

  // Refine to the lexicographically smallest optimum, row by row. Keeping
  // each row pinned once chosen makes the pops globally (cost, assignment)
  // sorted, which the solver relies on for deterministic tie-breaking.
  for (int i = 0; i < n; ++i) {
    if (forced_goal[i] >= 0) continue;
    std::vector<double> saved = m[i];
    for (int g = 0; g < n; ++g) {
      if (m[i][g] >= kForbidden) continue;
      for (int j = 0; j < n; ++j)
        if (j != g) m[i][j] = kForbidden;
      auto trial = solve_matrix(m);
      if (trial && trial->cost == optimum) {
        base = std::move(trial);
        break;
      }
      m[i] = saved;
    }
  }

  Node node;
  node.cost = optimum;
  node.assignment = std::move(base->goal_of_agent);
  node.forced = std::move(forced);
  node.banned = std::move(banned);
  return node;
}

std::optional<AssignmentSolution> AssignmentEnumerator::next() {
  if (open_.empty()) return std::nullopt;
  Node top = open_.top();
  open_.pop();

  const int n = (int)cost_.size();
  std::vector<char> forced_row(n, 0);
  for (auto [i, j] : top.forced) forced_row[i] = 1;
  auto forced = top.forced;
  for (int i = 0; i < n; ++i) {
    if (forced_row[i]) continue;
    auto banned = top.banned;
    banned.push_back({i, top.assignment[i]});
    if (auto child = solve_node(forced, std::move(banned))) open_.push(std::move(*child));
    forced.push_back({i, top.assignment[i]});
  }
  return AssignmentSolution{std::move(top.assignment), top.cost};
}

}  // namespace shuntbound
