#include "mlcbs/pathing.hpp"

#include <algorithm>
#include <limits>
#include <queue>

namespace mlcbs {

namespace {

std::uint64_t vertex_key(Vertex v, int t) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(t)) << 32) | static_cast<std::uint32_t>(v);
}

// 20 bits of time, 22 bits per vertex.
std::uint64_t edge_key(Vertex from, Vertex to, int t) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(t)) << 44) |
         (static_cast<std::uint64_t>(static_cast<std::uint32_t>(from)) << 22) | static_cast<std::uint32_t>(to);
}

}  // namespace

Path make_path(std::vector<Vertex> steps) {
  if (steps.empty()) throw std::invalid_argument("path needs at least one vertex");
  while (steps.size() > 1 && steps[steps.size() - 1] == steps[steps.size() - 2]) steps.pop_back();
  return Path{std::move(steps)};
}

ConstraintTable::ConstraintTable(int agent, std::span<const Constraint> constraints) {
  for (const Constraint& c : constraints) {
    if (c.agent != agent) continue;
    latest_time_ = std::max(latest_time_, c.time);
    if (c.kind == ConstraintKind::vertex) {
      vertex_.insert(vertex_key(c.from, c.time));
      auto& last = last_goal_block_.try_emplace(c.from, -1).first->second;
      last = std::max(last, c.time);
    } else {
      edge_.insert(edge_key(c.from, c.to, c.time));
      if (c.from == c.to) {
        auto& last = last_goal_block_.try_emplace(c.from, -1).first->second;
        last = std::max(last, c.time);
      }
    }
  }
}

bool ConstraintTable::vertex_blocked(Vertex v, int t) const {
  return !vertex_.empty() && vertex_.count(vertex_key(v, t)) > 0;
}

bool ConstraintTable::move_blocked(Vertex u, Vertex v, int t) const {
  if (vertex_blocked(v, t + 1)) return true;
  return !edge_.empty() && edge_.count(edge_key(u, v, t)) > 0;
}

int ConstraintTable::earliest_hold(Vertex goal) const {
  const auto it = last_goal_block_.find(goal);
  return it == last_goal_block_.end() ? 0 : it->second + 1;
}

CollisionTable::CollisionTable(std::span<const Path> paths, int skip_agent) {
  for (std::size_t a = 0; a < paths.size(); ++a) {
    if (static_cast<int>(a) == skip_agent) continue;
    const auto& steps = paths[a].steps;
    if (steps.empty()) continue;
    for (std::size_t t = 0; t < steps.size(); ++t) {
      ++vertex_[vertex_key(steps[t], static_cast<int>(t))];
      if (t + 1 < steps.size() && steps[t] != steps[t + 1]) {
        ++edge_[edge_key(steps[t], steps[t + 1], static_cast<int>(t))];
      }
    }
    parked_[steps.back()].push_back(static_cast<int>(steps.size()) - 1);
  }
  for (auto& [goal, times] : parked_) std::sort(times.begin(), times.end());
}

int CollisionTable::vertex_collisions(Vertex v, int t) const {
  int count = 0;
  if (auto it = vertex_.find(vertex_key(v, t)); it != vertex_.end()) count += it->second;
  // parked agents whose recorded path ended strictly before t
  if (auto it = parked_.find(v); it != parked_.end()) {
    count += static_cast<int>(std::lower_bound(it->second.begin(), it->second.end(), t) - it->second.begin());
  }
  return count;
}

int CollisionTable::edge_collisions(Vertex u, Vertex v, int t) const {
  if (u == v) return 0;
  const auto it = edge_.find(edge_key(v, u, t));
  return it == edge_.end() ? 0 : it->second;
}

namespace {

struct OpenEntry {
  int f;
  int g;
  Vertex v;
};

struct OpenOrder {
  bool operator()(const OpenEntry& a, const OpenEntry& b) const {
    if (a.f != b.f) return a.f > b.f;
    if (a.g != b.g) return a.g < b.g;
    return a.v > b.v;
  }
};

// Space-time A*; returns the minimal feasible cost or nullopt.
std::optional<int> minimal_cost(const GridMap& map, Vertex start, Vertex goal, const ConstraintTable& table,
                                const DistanceField& h, LowLevelStats* stats) {
  if (h[start] == kUnreachable) return std::nullopt;
  if (table.vertex_blocked(start, 0)) return std::nullopt;
  const int hold = table.earliest_hold(goal);
  const int frozen = table.latest_time() + 1;  // beyond this, states are time-invariant
  const long long horizon = static_cast<long long>(h[start]) + table.latest_time() + map.passable_count() + 1;

  std::priority_queue<OpenEntry, std::vector<OpenEntry>, OpenOrder> open;
  std::unordered_set<std::uint64_t> closed;
  open.push({h[start], 0, start});
  while (!open.empty()) {
    const OpenEntry cur = open.top();
    open.pop();
    if (!closed.insert(vertex_key(cur.v, std::min(cur.g, frozen))).second) continue;
    if (stats) ++stats->expansions;
    if (cur.v == goal && cur.g >= hold) return cur.g;
    if (cur.g + 1 > horizon) continue;
    auto relax = [&](Vertex w) {
      if (h[w] == kUnreachable || table.move_blocked(cur.v, w, cur.g)) return;
      if (closed.count(vertex_key(w, std::min(cur.g + 1, frozen)))) return;
      open.push({cur.g + 1 + h[w], cur.g + 1, w});
    };
    relax(cur.v);
    for (Vertex w : map.neighbors(cur.v)) relax(w);
  }
  return std::nullopt;
}

struct Layers {
  std::vector<std::vector<Vertex>> levels;
  std::vector<std::vector<std::vector<int>>> children;
};

// Forward reachability intersected with backward reachability over the
// constraint-filtered time-expanded graph, restricted to cost exactly `cost`.
std::optional<Layers> layered_paths(const GridMap& map, Vertex start, Vertex goal, int cost,
                                    const ConstraintTable& table, const DistanceField& h) {
  if (cost < 0 || h[start] == kUnreachable || h[start] > cost) return std::nullopt;
  if (table.vertex_blocked(start, 0) || table.earliest_hold(goal) > cost) return std::nullopt;
  if (cost == 0) {
    if (start != goal) return std::nullopt;
    return Layers{{{start}}, {{}}};
  }

  std::vector<std::vector<Vertex>> forward(static_cast<std::size_t>(cost) + 1);
  forward[0] = {start};
  if (cost - 1 == 0 && start == goal) return std::nullopt;
  std::vector<int> stamp(static_cast<std::size_t>(map.size()), -1);
  for (int t = 0; t < cost; ++t) {
    auto& next = forward[static_cast<std::size_t>(t) + 1];
    const int remaining = cost - t - 1;
    for (Vertex u : forward[static_cast<std::size_t>(t)]) {
      auto consider = [&](Vertex v) {
        if (stamp[static_cast<std::size_t>(v)] == t + 1) return;
        if (h[v] > remaining) return;
        if (t + 1 == cost - 1 && v == goal) return;  // would make the cost at most cost - 1
        if (table.move_blocked(u, v, t)) return;
        stamp[static_cast<std::size_t>(v)] = t + 1;
        next.push_back(v);
      };
      consider(u);
      for (Vertex v : map.neighbors(u)) consider(v);
    }
    std::sort(next.begin(), next.end());
    if (next.empty()) return std::nullopt;
  }
  if (forward[static_cast<std::size_t>(cost)] != std::vector<Vertex>{goal}) return std::nullopt;

  Layers layers;
  layers.levels.resize(static_cast<std::size_t>(cost) + 1);
  layers.children.resize(static_cast<std::size_t>(cost) + 1);
  layers.levels[static_cast<std::size_t>(cost)] = {goal};
  layers.children[static_cast<std::size_t>(cost)] = {{}};
  for (int t = cost - 1; t >= 0; --t) {
    const auto& above = layers.levels[static_cast<std::size_t>(t) + 1];
    auto& level = layers.levels[static_cast<std::size_t>(t)];
    auto& kids = layers.children[static_cast<std::size_t>(t)];
    for (Vertex u : forward[static_cast<std::size_t>(t)]) {
      std::vector<int> succ;
      for (std::size_t j = 0; j < above.size(); ++j) {
        const Vertex v = above[j];
        if ((v == u || map.adjacent(u, v)) && !table.move_blocked(u, v, t)) succ.push_back(static_cast<int>(j));
      }
      if (!succ.empty()) {
        level.push_back(u);
        kids.push_back(std::move(succ));
      }
    }
    if (level.empty()) return std::nullopt;
  }
  return layers;
}

const DistanceField& ensure_distance(const GridMap& map, Vertex goal, const DistanceField* given,
                                     std::optional<DistanceField>& storage) {
  if (given) return *given;
  storage = bfs_distance(map, goal);
  return *storage;
}

}  // namespace

std::optional<Path> plan_path(const GridMap& map, Vertex start, Vertex goal, int agent,
                              std::span<const Constraint> constraints, const CollisionTable* avoid,
                              const DistanceField* goal_distance, LowLevelStats* stats) {
  if (!map.passable(start) || !map.passable(goal)) throw std::invalid_argument("start or goal is blocked");
  std::optional<DistanceField> storage;
  const DistanceField& h = ensure_distance(map, goal, goal_distance, storage);
  const ConstraintTable table(agent, constraints);
  const auto cost = minimal_cost(map, start, goal, table, h, stats);
  if (!cost) return std::nullopt;
  auto layers = layered_paths(map, start, goal, *cost, table, h);
  if (!layers) return std::nullopt;  // unreachable when the A* cost is right

  // Fewest collisions over the layered DAG; ties keep the smallest-index predecessor.
  const int c = *cost;
  std::vector<std::vector<int>> best(static_cast<std::size_t>(c) + 1);
  std::vector<std::vector<int>> parent(static_cast<std::size_t>(c) + 1);
  for (int t = 0; t <= c; ++t) {
    best[static_cast<std::size_t>(t)].assign(layers->levels[static_cast<std::size_t>(t)].size(),
                                             std::numeric_limits<int>::max());
    parent[static_cast<std::size_t>(t)].assign(layers->levels[static_cast<std::size_t>(t)].size(), -1);
  }
  best[0][0] = avoid ? avoid->vertex_collisions(start, 0) : 0;
  for (int t = 0; t < c; ++t) {
    const auto& level = layers->levels[static_cast<std::size_t>(t)];
    const auto& above = layers->levels[static_cast<std::size_t>(t) + 1];
    for (std::size_t i = 0; i < level.size(); ++i) {
      const int base = best[static_cast<std::size_t>(t)][i];
      if (base == std::numeric_limits<int>::max()) continue;
      for (int j : layers->children[static_cast<std::size_t>(t)][i]) {
        const Vertex u = level[i];
        const Vertex v = above[static_cast<std::size_t>(j)];
        int cand = base;
        if (avoid) cand += avoid->vertex_collisions(v, t + 1) + avoid->edge_collisions(u, v, t);
        auto& slot = best[static_cast<std::size_t>(t) + 1][static_cast<std::size_t>(j)];
        if (cand < slot) {
          slot = cand;
          parent[static_cast<std::size_t>(t) + 1][static_cast<std::size_t>(j)] = static_cast<int>(i);
        }
      }
    }
  }
  std::vector<Vertex> steps(static_cast<std::size_t>(c) + 1);
  int idx = 0;
  for (int t = c; t >= 0; --t) {
    steps[static_cast<std::size_t>(t)] = layers->levels[static_cast<std::size_t>(t)][static_cast<std::size_t>(idx)];
    if (t > 0) idx = parent[static_cast<std::size_t>(t)][static_cast<std::size_t>(idx)];
  }
  return make_path(std::move(steps));
}

Mdd::Mdd(std::vector<std::vector<Vertex>> levels, std::vector<std::vector<std::vector<int>>> children)
    : levels_(std::move(levels)), children_(std::move(children)) {}

bool Mdd::contains(int t, Vertex v) const {
  if (t < 0) t = 0;
  if (t > cost()) return v == levels_.back().front();
  const auto lvl = level(t);
  return std::binary_search(lvl.begin(), lvl.end(), v);
}

std::size_t Mdd::node_count() const {
  std::size_t n = 0;
  for (const auto& l : levels_) n += l.size();
  return n;
}

Mdd build_mdd(const GridMap& map, Vertex start, Vertex goal, int agent, int cost,
              std::span<const Constraint> constraints, const DistanceField* goal_distance) {
  if (!map.passable(start) || !map.passable(goal)) throw std::invalid_argument("start or goal is blocked");
  std::optional<DistanceField> storage;
  const DistanceField& h = ensure_distance(map, goal, goal_distance, storage);
  const ConstraintTable table(agent, constraints);
  auto layers = layered_paths(map, start, goal, cost, table, h);
  if (!layers) throw EmptyMddError("no constraint-respecting path of cost " + std::to_string(cost));
  return Mdd(std::move(layers->levels), std::move(layers->children));
}

int mdd_width(const Mdd& mdd, int t) {
  if (t < 0) t = 0;
  if (t > mdd.cost()) return 1;
  return static_cast<int>(mdd.level(t).size());
}

}  // namespace mlcbs
