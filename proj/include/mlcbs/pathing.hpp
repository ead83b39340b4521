#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "mlcbs/grid_map.hpp"

namespace mlcbs {

enum class ConstraintKind : std::uint8_t { vertex, edge };

// Vertex constraint: agent may not be at `from` (== `to`) at `time`.
// Edge constraint: agent may not move from -> to between `time` and `time + 1`.
struct Constraint {
  ConstraintKind kind = ConstraintKind::vertex;
  int agent = 0;
  Vertex from = 0;
  Vertex to = 0;
  int time = 0;

  auto operator<=>(const Constraint&) const = default;
};

inline Constraint vertex_constraint(int agent, Vertex v, int time) {
  return {ConstraintKind::vertex, agent, v, v, time};
}
inline Constraint edge_constraint(int agent, Vertex from, Vertex to, int time) {
  return {ConstraintKind::edge, agent, from, to, time};
}

// A path is stored without trailing waits at the goal, so cost == steps.size() - 1
// and the agent is parked at steps.back() afterwards.
struct Path {
  std::vector<Vertex> steps;

  int cost() const { return static_cast<int>(steps.size()) - 1; }
  Vertex at(int t) const { return t < static_cast<int>(steps.size()) ? steps[static_cast<std::size_t>(t)] : steps.back(); }
  Vertex goal() const { return steps.back(); }
  bool operator==(const Path&) const = default;
};

// Drops trailing waits so the stored length matches the path's cost.
Path make_path(std::vector<Vertex> steps);

// Constraints of a single agent, indexed for O(1) lookups.
class ConstraintTable {
 public:
  ConstraintTable(int agent, std::span<const Constraint> constraints);

  bool vertex_blocked(Vertex v, int t) const;
  // Moving (or waiting when u == v) from u at t to v at t + 1.
  bool move_blocked(Vertex u, Vertex v, int t) const;
  // Smallest t such that staying at `goal` for every step >= t violates nothing.
  int earliest_hold(Vertex goal) const;
  int latest_time() const { return latest_time_; }
  bool empty() const { return vertex_.empty() && edge_.empty(); }

 private:
  std::unordered_set<std::uint64_t> vertex_;
  std::unordered_set<std::uint64_t> edge_;
  std::unordered_map<Vertex, int> last_goal_block_;
  int latest_time_ = -1;
};

// Occupancy of other agents' paths (parked agents included) for
// conflict-avoidance tie-breaking.
class CollisionTable {
 public:
  CollisionTable() = default;
  CollisionTable(std::span<const Path> paths, int skip_agent);

  int vertex_collisions(Vertex v, int t) const;
  // Others traversing v -> u between t and t + 1.
  int edge_collisions(Vertex u, Vertex v, int t) const;

 private:
  std::unordered_map<std::uint64_t, int> vertex_;
  std::unordered_map<std::uint64_t, int> edge_;
  std::unordered_map<Vertex, std::vector<int>> parked_;  // goal -> sorted arrival times
};

struct LowLevelStats {
  long long expansions = 0;
};

// Cost-minimal path respecting every constraint naming `agent`; among those,
// one with the fewest collisions against `avoid`. std::nullopt when infeasible.
std::optional<Path> plan_path(const GridMap& map, Vertex start, Vertex goal, int agent,
                              std::span<const Constraint> constraints, const CollisionTable* avoid = nullptr,
                              const DistanceField* goal_distance = nullptr, LowLevelStats* stats = nullptr);

class EmptyMddError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// All constraint-respecting paths of cost exactly `cost`, layered by time step.
class Mdd {
 public:
  Mdd(std::vector<std::vector<Vertex>> levels, std::vector<std::vector<std::vector<int>>> children);

  int cost() const { return static_cast<int>(levels_.size()) - 1; }
  std::span<const Vertex> level(int t) const { return levels_[static_cast<std::size_t>(t)]; }
  // Indices into level(t + 1) reachable from level(t)[index].
  std::span<const int> children(int t, int index) const {
    return children_[static_cast<std::size_t>(t)][static_cast<std::size_t>(index)];
  }
  bool contains(int t, Vertex v) const;
  std::size_t node_count() const;

 private:
  std::vector<std::vector<Vertex>> levels_;
  std::vector<std::vector<std::vector<int>>> children_;
};

Mdd build_mdd(const GridMap& map, Vertex start, Vertex goal, int agent, int cost,
              std::span<const Constraint> constraints, const DistanceField* goal_distance = nullptr);

// Level widths with the parked-at-goal convention past the cost; negative levels clamp to 0.
int mdd_width(const Mdd& mdd, int t);

}  // namespace mlcbs
