#pragma once

#include <chrono>
#include <cstdint>
#include <deque>
#include <functional>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mlcbs/grid_map.hpp"
#include "mlcbs/pathing.hpp"

namespace mlcbs {

enum class ConflictKind : std::uint8_t { vertex, edge };
enum class Cardinality : std::uint8_t { cardinal, semi_cardinal, non_cardinal, unclassified };

const char* to_string(Cardinality c);

// Vertex conflict: agent1 and agent2 both at `from` (== `to`) at `time`.
// Edge conflict: agent1 moves from -> to while agent2 moves to -> from, between
// `time` and `time + 1`. Always agent1 < agent2.
struct Conflict {
  ConflictKind kind = ConflictKind::vertex;
  int agent1 = 0;
  int agent2 = 0;
  Vertex from = 0;
  Vertex to = 0;
  int time = 0;
  Cardinality cardinality = Cardinality::unclassified;

  // Location and time only; cardinality is derived data.
  bool same_collision(const Conflict& o) const {
    return kind == o.kind && agent1 == o.agent1 && agent2 == o.agent2 && from == o.from && to == o.to &&
           time == o.time;
  }
  bool involves(int agent) const { return agent1 == agent || agent2 == agent; }
  bool operator==(const Conflict&) const = default;
};

// Canonical order: time, agents, kind, location.
bool conflict_less(const Conflict& a, const Conflict& b);

std::vector<Conflict> detect_conflicts(std::span<const Path> paths);
// Collisions between `agent` and every other agent.
std::vector<Conflict> detect_conflicts_with(std::span<const Path> paths, int agent);

// A conflict is cardinal when the contested vertex (edge) is the only one at its
// level(s) in both agents' MDDs, semi-cardinal in exactly one.
Cardinality classify_conflict(const Conflict& conflict, const Mdd& mdd1, const Mdd& mdd2);

// (constraint on agent1, constraint on agent2)
std::pair<Constraint, Constraint> split(const Conflict& conflict);

struct WeightedEdge {
  int u;
  int v;
  int weight;
};

// min sum x_v over nonnegative integers with x_u + x_v >= weight for every edge.
int weighted_mvc(std::span<const WeightedEdge> edges);

struct CTNode {
  std::uint64_t id = 0;
  std::optional<std::uint64_t> parent;
  std::optional<Constraint> constraint;
  std::vector<Path> paths;
  int g = 0;
  int h = 0;
  std::vector<Conflict> conflicts;
  int depth = 0;
  // WDG edge weights for every pair of agents that conflict at this node.
  std::map<std::pair<int, int>, int> pair_weights;

  int f() const { return g + h; }
  int pair_weight(int a, int b) const;
  int makespan() const;
};

struct ResolutionHistory {
  std::vector<int> per_agent;
  std::vector<int> per_vertex;

  ResolutionHistory() = default;
  ResolutionHistory(int agents, int vertices) : per_agent(agents, 0), per_vertex(vertices, 0) {}
  void record(const Conflict& conflict);
};

struct RunRecord {
  bool solved = false;
  std::optional<int> cost;
  double runtime_s = 0.0;
  double oracle_time_s = 0.0;
  long long ct_expanded = 0;
  long long ct_generated = 0;
};

struct SearchLimits {
  double time_limit_s = 60.0;
  long long node_limit = 1'000'000;
  // Low-level expansions allowed per nested two-agent search in the WDG heuristic.
  long long wdg_pair_budget = 10'000;
};

struct ChildSummary {
  bool feasible = false;
  int g = 0;
  int h = 0;
  std::size_t conflicts = 0;
};

struct Selection {
  std::size_t index = 0;  // into node.conflicts
  std::vector<double> scores;
  // Children of the selected conflict when the policy built them during lookahead.
  std::optional<std::pair<std::optional<CTNode>, std::optional<CTNode>>> children;
};

class Search;

class SelectionPolicy {
 public:
  virtual ~SelectionPolicy() = default;
  virtual Selection select(Search& search, const CTNode& node) = 0;
  virtual std::string name() const = 0;
};

struct SolveResult {
  RunRecord record;
  std::optional<std::vector<Path>> solution;
};

using ExpansionObserver = std::function<void(Search&, const CTNode&, const Selection&)>;

// Per-instance solver state: node arena, caches, resolution history, timers.
// Single-threaded; use one Search per concurrent solve.
class Search {
 public:
  explicit Search(const Instance& instance, SearchLimits limits = {});

  const Instance& instance() const { return instance_; }
  const GridMap& map() const { return *instance_.map; }
  int agents() const { return instance_.agents(); }
  const SearchLimits& limits() const { return limits_; }

  int individual_cost(int agent) const { return individual_cost_[static_cast<std::size_t>(agent)]; }
  const DistanceField& goal_distance(int agent) const { return goal_distance_[static_cast<std::size_t>(agent)]; }
  const ResolutionHistory& history() const { return history_; }

  // Root with individually cost-minimal paths, classified and with its WDG h;
  // nullopt if some agent has no path at all.
  std::optional<CTNode> make_root();
  // Stores a node in the arena and assigns its id.
  const CTNode& add_node(CTNode node);
  const CTNode& node(std::uint64_t id) const { return arena_[static_cast<std::size_t>(id)]; }

  // Child of an arena node under one extra constraint; nullopt when the
  // constrained agent cannot be replanned.
  std::optional<CTNode> expand_child(const CTNode& parent, const Constraint& constraint);

  std::vector<Constraint> constraints_for(const CTNode& node, int agent) const;
  std::shared_ptr<const Mdd> mdd(const CTNode& node, int agent);
  void classify(CTNode& node);
  // Fills node.pair_weights and returns the weighted vertex cover value.
  int wdg_heuristic(CTNode& node);

  SolveResult solve(SelectionPolicy& policy, const ExpansionObserver& observer = {});

  bool out_of_time() const;
  double elapsed_s() const;

 private:
  int pair_delta(const CTNode& node, int a, int b);

  Instance instance_;
  SearchLimits limits_;
  std::vector<DistanceField> goal_distance_;
  std::vector<int> individual_cost_;
  std::deque<CTNode> arena_;
  ResolutionHistory history_;
  std::map<std::vector<int>, std::shared_ptr<const Mdd>> mdd_cache_;
  std::map<std::vector<int>, int> pair_cache_;
  std::chrono::steady_clock::time_point started_;
};

// Optimal sum of costs for two agents under their constraints, by a nested
// CBS; nullopt when `budget` low-level expansions do not suffice.
std::optional<int> solve_two_agents(const GridMap& map, const Task& a, const Task& b,
                                    std::span<const Constraint> constraints_a,
                                    std::span<const Constraint> constraints_b, const DistanceField& distance_a,
                                    const DistanceField& distance_b, long long budget);

// One line per agent: vertex ids at time steps 0..cost.
void write_solution(std::ostream& out, std::span<const Path> paths);

// Valid iff every path goes start -> goal over adjacent cells and no two collide.
bool is_valid_solution(const Instance& instance, std::span<const Path> paths);

}  // namespace mlcbs
