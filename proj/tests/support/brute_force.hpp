#pragma once

// Deliberately naive reference implementations used as test oracles.

#include <algorithm>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <queue>
#include <set>
#include <span>
#include <utility>
#include <vector>

#include "mlcbs/cbs.hpp"
#include "mlcbs/grid_map.hpp"
#include "mlcbs/pathing.hpp"

namespace brute {

using mlcbs::Constraint;
using mlcbs::ConstraintKind;
using mlcbs::GridMap;
using mlcbs::Vertex;

inline std::vector<Vertex> moves(const GridMap& map, Vertex v) {
  std::vector<Vertex> out{v};
  for (Vertex w : map.neighbors(v)) out.push_back(w);
  return out;
}

inline bool vertex_ok(std::span<const Constraint> cs, int agent, Vertex v, int t) {
  for (const auto& c : cs)
    if (c.agent == agent && c.kind == ConstraintKind::vertex && c.from == v && c.time == t) return false;
  return true;
}

inline bool move_ok(std::span<const Constraint> cs, int agent, Vertex u, Vertex v, int t) {
  for (const auto& c : cs)
    if (c.agent == agent && c.kind == ConstraintKind::edge && c.from == u && c.to == v && c.time == t) return false;
  return vertex_ok(cs, agent, v, t + 1);
}

// Staying at goal from time t onward breaks no constraint.
inline bool can_hold(std::span<const Constraint> cs, int agent, Vertex goal, int t) {
  for (const auto& c : cs) {
    if (c.agent != agent || c.time < t) continue;
    if (c.kind == ConstraintKind::vertex && c.from == goal) return false;
    if (c.kind == ConstraintKind::edge && c.from == goal && c.to == goal) return false;
  }
  return true;
}

inline int latest(std::span<const Constraint> cs) {
  int t = -1;
  for (const auto& c : cs) t = std::max(t, c.time);
  return t;
}

// Minimal single-agent cost by BFS over (vertex, time) up to a generous horizon.
inline std::optional<int> space_time_cost(const GridMap& map, Vertex start, Vertex goal, int agent,
                                          std::span<const Constraint> cs) {
  if (!vertex_ok(cs, agent, start, 0)) return std::nullopt;
  const int horizon = latest(cs) + map.size() + 2;
  std::set<std::pair<Vertex, int>> seen{{start, 0}};
  std::deque<std::pair<Vertex, int>> queue{{start, 0}};
  while (!queue.empty()) {
    const auto [v, t] = queue.front();
    queue.pop_front();
    if (v == goal && can_hold(cs, agent, goal, t)) return t;
    if (t >= horizon) continue;
    for (Vertex w : moves(map, v)) {
      if (!move_ok(cs, agent, v, w, t)) continue;
      if (seen.insert({w, t + 1}).second) queue.emplace_back(w, t + 1);
    }
  }
  return std::nullopt;
}

// Every constraint-respecting path whose cost is exactly `cost`.
inline std::set<std::vector<Vertex>> enumerate_paths(const GridMap& map, Vertex start, Vertex goal, int agent,
                                                     int cost, std::span<const Constraint> cs) {
  std::set<std::vector<Vertex>> out;
  if (!vertex_ok(cs, agent, start, 0)) return out;
  std::vector<Vertex> path{start};
  std::function<void(int)> dfs = [&](int t) {
    const Vertex v = path.back();
    if (t == cost) {
      const bool arrives_now = cost == 0 || path[static_cast<std::size_t>(cost) - 1] != goal;
      if (v == goal && arrives_now && can_hold(cs, agent, goal, cost)) out.insert(path);
      return;
    }
    for (Vertex w : moves(map, v)) {
      if (!move_ok(cs, agent, v, w, t)) continue;
      path.push_back(w);
      dfs(t + 1);
      path.pop_back();
    }
  };
  dfs(0);
  return out;
}

inline std::set<std::vector<Vertex>> mdd_paths(const mlcbs::Mdd& mdd) {
  std::set<std::vector<Vertex>> out;
  std::vector<Vertex> path;
  std::function<void(int, int)> dfs = [&](int t, int idx) {
    path.push_back(mdd.level(t)[static_cast<std::size_t>(idx)]);
    if (t == mdd.cost()) {
      out.insert(path);
    } else {
      for (int child : mdd.children(t, idx)) dfs(t + 1, child);
    }
    path.pop_back();
  };
  dfs(0, 0);
  return out;
}

// Optimal sum of costs by search over joint states (positions, finished flags).
// A finished agent rests on its goal for good; each unfinished agent pays 1 per step.
inline std::optional<int> joint_optimum(const mlcbs::Instance& instance) {
  const GridMap& map = *instance.map;
  const int k = instance.agents();
  std::vector<mlcbs::DistanceField> dist;
  for (const auto& t : instance.tasks) dist.push_back(mlcbs::bfs_distance(map, t.goal));
  using State = std::pair<std::vector<Vertex>, unsigned>;
  auto h = [&](const State& s) {
    int sum = 0;
    for (int a = 0; a < k; ++a)
      if (!(s.second >> a & 1u)) {
        const int d = dist[static_cast<std::size_t>(a)][s.first[static_cast<std::size_t>(a)]];
        if (d == mlcbs::kUnreachable) return -1;
        sum += d;
      }
    return sum;
  };
  std::map<State, int> best;
  using Entry = std::pair<int, std::pair<int, State>>;  // (f, (g, state))
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;
  State start;
  for (const auto& t : instance.tasks) start.first.push_back(t.start);
  start.second = 0;
  if (h(start) < 0) return std::nullopt;
  best[start] = 0;
  open.push({h(start), {0, start}});
  const unsigned all = (1u << k) - 1;
  while (!open.empty()) {
    const auto [f, gs] = open.top();
    open.pop();
    const auto& [g, s] = gs;
    if (best[s] < g) continue;
    if (s.second == all) return g;
    auto relax = [&](const State& n, int cost) {
      const int hn = h(n);
      if (hn < 0) return;
      auto it = best.find(n);
      if (it != best.end() && it->second <= cost) return;
      best[n] = cost;
      open.push({cost + hn, {cost, n}});
    };
    // finishing is free
    for (int a = 0; a < k; ++a) {
      if (s.second >> a & 1u) continue;
      if (s.first[static_cast<std::size_t>(a)] != instance.tasks[static_cast<std::size_t>(a)].goal) continue;
      State n = s;
      n.second |= 1u << a;
      relax(n, g);
    }
    // joint step of all unfinished agents
    std::vector<int> active;
    for (int a = 0; a < k; ++a)
      if (!(s.second >> a & 1u)) active.push_back(a);
    std::vector<Vertex> next = s.first;
    std::function<void(std::size_t)> rec = [&](std::size_t i) {
      if (i == active.size()) {
        for (int a = 0; a < k; ++a)
          for (int b = a + 1; b < k; ++b) {
            if (next[static_cast<std::size_t>(a)] == next[static_cast<std::size_t>(b)]) return;
            if (next[static_cast<std::size_t>(a)] == s.first[static_cast<std::size_t>(b)] &&
                next[static_cast<std::size_t>(b)] == s.first[static_cast<std::size_t>(a)] &&
                next[static_cast<std::size_t>(a)] != s.first[static_cast<std::size_t>(a)])
              return;
          }
        relax({next, s.second}, g + static_cast<int>(active.size()));
        return;
      }
      const int a = active[i];
      for (Vertex w : moves(map, s.first[static_cast<std::size_t>(a)])) {
        next[static_cast<std::size_t>(a)] = w;
        rec(i + 1);
      }
      next[static_cast<std::size_t>(a)] = s.first[static_cast<std::size_t>(a)];
    };
    if (!active.empty()) rec(0);
  }
  return std::nullopt;
}

// BFS over an explicitly materialized time-expanded graph with times 0..max_time,
// links taken in both directions.
inline int explicit_te_distance(const GridMap& map, std::span<const std::pair<Vertex, int>> sources,
                                std::span<const std::pair<Vertex, int>> targets, int max_time, int cap) {
  std::map<std::pair<Vertex, int>, std::vector<std::pair<Vertex, int>>> graph;
  for (int t = 0; t < max_time; ++t)
    for (Vertex v = 0; v < map.size(); ++v) {
      if (!map.passable(v)) continue;
      for (Vertex w : moves(map, v)) {
        graph[{v, t}].push_back({w, t + 1});
        graph[{w, t + 1}].push_back({v, t});
      }
    }
  std::map<std::pair<Vertex, int>, int> dist;
  std::deque<std::pair<Vertex, int>> queue;
  for (const auto& s : sources)
    if (dist.emplace(s, 0).second) queue.push_back(s);
  while (!queue.empty()) {
    const auto cur = queue.front();
    queue.pop_front();
    for (const auto& n : graph[cur])
      if (dist.emplace(n, dist[cur] + 1).second) queue.push_back(n);
  }
  int best = cap + 1;
  for (const auto& q : targets) {
    const auto it = dist.find(q);
    if (it != dist.end()) best = std::min(best, it->second);
  }
  return best;
}

inline int mvc_enumerate(std::span<const mlcbs::WeightedEdge> edges) {
  std::map<int, int> index;
  int maxw = 0;
  for (const auto& e : edges) {
    index.emplace(e.u, 0);
    index.emplace(e.v, 0);
    maxw = std::max(maxw, e.weight);
  }
  int n = 0;
  for (auto& [v, i] : index) i = n++;
  std::vector<int> x(static_cast<std::size_t>(n), 0);
  int best = 1 << 30;
  std::function<void(int, int)> rec = [&](int i, int sum) {
    if (sum >= best) return;
    if (i == n) {
      for (const auto& e : edges)
        if (x[static_cast<std::size_t>(index[e.u])] + x[static_cast<std::size_t>(index[e.v])] < e.weight) return;
      best = sum;
      return;
    }
    for (int val = 0; val <= maxw; ++val) {
      x[static_cast<std::size_t>(i)] = val;
      rec(i + 1, sum + val);
    }
    x[static_cast<std::size_t>(i)] = 0;
  };
  rec(0, 0);
  return edges.empty() ? 0 : best;
}

// Map from rows of '.' and '@'.
inline std::shared_ptr<const GridMap> grid(const std::vector<std::string>& rows, const std::string& name = "test") {
  const int h = static_cast<int>(rows.size());
  const int w = static_cast<int>(rows.front().size());
  std::vector<bool> blocked;
  for (const auto& r : rows)
    for (char c : r) blocked.push_back(c == '@');
  return std::make_shared<const GridMap>(w, h, blocked, name);
}

}  // namespace brute
