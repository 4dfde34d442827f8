#pragma once

#include <limits>
#include <optional>
#include <queue>
#include <vector>

namespace shuntbound {

inline constexpr double kForbidden = std::numeric_limits<double>::infinity();

struct AssignmentSolution {
  std::vector<int> goal_of_agent;  // bijection agents -> goals
  double cost = 0.0;
};

/// Minimum-cost perfect matching on a square cost matrix; kForbidden marks
/// impossible pairs (type mismatch or no route). nullopt when no finite
/// perfect matching exists.
std::optional<AssignmentSolution> min_cost_assignment(const std::vector<std::vector<double>>& cost);

/// Murty-style k-best enumeration: yields every finite-cost bijection exactly
/// once, in nondecreasing cost order (ties broken lexicographically).
class AssignmentEnumerator {
 public:
  explicit AssignmentEnumerator(std::vector<std::vector<double>> cost);

  std::optional<AssignmentSolution> next();

 private:
  struct Node {
    double cost = 0.0;
    std::vector<int> assignment;
    std::vector<std::pair<int, int>> forced;  // (agent, goal) pairs fixed in
    std::vector<std::pair<int, int>> banned;  // (agent, goal) pairs cut out

    bool operator>(const Node& other) const {
      if (cost != other.cost) return cost > other.cost;
      return assignment > other.assignment;
    }
  };

  std::optional<Node> solve_node(std::vector<std::pair<int, int>> forced,
                                 std::vector<std::pair<int, int>> banned) const;

  std::vector<std::vector<double>> cost_;
  std::priority_queue<Node, std::vector<Node>, std::greater<Node>> open_;
};

}  // namespace shuntbound
