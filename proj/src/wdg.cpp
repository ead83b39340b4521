#include <algorithm>
#include <array>
#include <map>
#include <numeric>
#include <set>
#include <tuple>

#include "mlcbs/cbs.hpp"

namespace mlcbs {

namespace {

struct PairNode {
  std::array<Path, 2> paths;
  std::array<std::vector<Constraint>, 2> constraints;
  int g = 0;
  int h = 0;
  bool evaluated = false;
  std::vector<Conflict> conflicts;
};

}  // namespace

std::optional<int> solve_two_agents(const GridMap& map, const Task& a, const Task& b,
                                    std::span<const Constraint> constraints_a,
                                    std::span<const Constraint> constraints_b, const DistanceField& distance_a,
                                    const DistanceField& distance_b, long long budget) {
  const std::array<Task, 2> tasks{a, b};
  const std::array<const DistanceField*, 2> dist{&distance_a, &distance_b};
  LowLevelStats stats;

  auto plan = [&](int i, std::span<const Constraint> cons, const Path* other) -> std::optional<Path> {
    std::optional<CollisionTable> avoid;
    if (other) avoid.emplace(std::span<const Path>(other, 1), -1);
    return plan_path(map, tasks[static_cast<std::size_t>(i)].start, tasks[static_cast<std::size_t>(i)].goal, i, cons,
                     avoid ? &*avoid : nullptr, dist[static_cast<std::size_t>(i)], &stats);
  };

  std::vector<PairNode> nodes;
  PairNode root;
  root.constraints[0].assign(constraints_a.begin(), constraints_a.end());
  root.constraints[1].assign(constraints_b.begin(), constraints_b.end());
  // Constraints arrive tagged with the outer agent ids; retag to 0/1.
  for (int i = 0; i < 2; ++i)
    for (auto& c : root.constraints[static_cast<std::size_t>(i)]) c.agent = i;
  auto p0 = plan(0, root.constraints[0], nullptr);
  if (!p0) return std::nullopt;
  auto p1 = plan(1, root.constraints[1], &*p0);
  if (!p1) return std::nullopt;
  root.paths = {std::move(*p0), std::move(*p1)};
  root.g = root.paths[0].cost() + root.paths[1].cost();
  nodes.push_back(std::move(root));

  std::set<std::tuple<int, std::size_t, long long>> open;
  open.emplace(nodes[0].g, 0, 0);
  while (!open.empty()) {
    if (stats.expansions > budget) return std::nullopt;
    const auto top = *open.begin();
    open.erase(open.begin());
    const auto id = static_cast<std::size_t>(-std::get<2>(top));
    if (!nodes[id].evaluated) {
      PairNode& n = nodes[id];
      n.evaluated = true;
      n.conflicts = detect_conflicts(n.paths);
      if (!n.conflicts.empty()) {
        const Mdd m0 = build_mdd(map, a.start, a.goal, 0, n.paths[0].cost(), n.constraints[0], &distance_a);
        const Mdd m1 = build_mdd(map, b.start, b.goal, 1, n.paths[1].cost(), n.constraints[1], &distance_b);
        for (auto& c : n.conflicts) c.cardinality = classify_conflict(c, m0, m1);
        // cardinal first, then semi-cardinal, then earliest
        std::stable_sort(n.conflicts.begin(), n.conflicts.end(), [](const Conflict& x, const Conflict& y) {
          return static_cast<int>(x.cardinality) < static_cast<int>(y.cardinality);
        });
        if (n.conflicts.front().cardinality == Cardinality::cardinal) n.h = 1;
      }
      if (n.h > 0) {
        open.emplace(n.g + n.h, n.conflicts.size(), -static_cast<long long>(id));
        continue;
      }
    }
    if (nodes[id].conflicts.empty()) return nodes[id].g;

    const auto [c0, c1] = split(nodes[id].conflicts.front());
    for (const Constraint& c : {c0, c1}) {
      const int i = c.agent;
      PairNode child;
      child.constraints = nodes[id].constraints;
      child.constraints[static_cast<std::size_t>(i)].push_back(c);
      auto path = plan(i, child.constraints[static_cast<std::size_t>(i)], &nodes[id].paths[static_cast<std::size_t>(1 - i)]);
      if (stats.expansions > budget) return std::nullopt;
      if (!path) continue;
      child.paths = nodes[id].paths;
      child.paths[static_cast<std::size_t>(i)] = std::move(*path);
      child.g = child.paths[0].cost() + child.paths[1].cost();
      // children inherit the parent's bound until evaluated
      child.h = std::max(0, nodes[id].g + nodes[id].h - child.g);
      nodes.push_back(std::move(child));
      const auto cid = nodes.size() - 1;
      open.emplace(nodes[cid].g + nodes[cid].h, nodes[id].conflicts.size(), -static_cast<long long>(cid));
    }
  }
  return std::nullopt;
}

namespace {

struct MvcSolver {
  std::vector<std::vector<std::pair<int, int>>> adj;  // (neighbor, weight)
  std::vector<int> order;
  std::vector<int> pos;  // position in order
  std::vector<int> x;
  std::vector<int> cap;
  int best = 0;

  int lower_bound(std::size_t depth) const {
    const std::size_t n = order.size();
    std::vector<int> req(adj.size(), 0);
    for (std::size_t k = depth; k < n; ++k) {
      const int v = order[k];
      for (auto [u, w] : adj[static_cast<std::size_t>(v)])
        if (static_cast<std::size_t>(pos[static_cast<std::size_t>(u)]) < depth)
          req[static_cast<std::size_t>(v)] = std::max(req[static_cast<std::size_t>(v)], w - x[static_cast<std::size_t>(u)]);
    }
    int lb = 0;
    for (std::size_t k = depth; k < n; ++k) lb += req[static_cast<std::size_t>(order[k])];
    // greedy matching on residual weights among unassigned vertices
    std::vector<std::tuple<int, int, int>> residual;
    for (std::size_t k = depth; k < n; ++k) {
      const int v = order[k];
      for (auto [u, w] : adj[static_cast<std::size_t>(v)]) {
        if (u <= v || static_cast<std::size_t>(pos[static_cast<std::size_t>(u)]) < depth) continue;
        const int r = w - req[static_cast<std::size_t>(u)] - req[static_cast<std::size_t>(v)];
        if (r > 0) residual.emplace_back(r, v, u);
      }
    }
    std::sort(residual.begin(), residual.end(), std::greater<>());
    std::vector<bool> used(adj.size(), false);
    for (auto [r, v, u] : residual) {
      if (used[static_cast<std::size_t>(v)] || used[static_cast<std::size_t>(u)]) continue;
      used[static_cast<std::size_t>(v)] = used[static_cast<std::size_t>(u)] = true;
      lb += r;
    }
    return lb;
  }

  void search(std::size_t depth, int sum) {
    if (depth == order.size()) {
      best = std::min(best, sum);
      return;
    }
    if (sum + lower_bound(depth) >= best) return;
    const int v = order[depth];
    int lo = 0;
    for (auto [u, w] : adj[static_cast<std::size_t>(v)])
      if (static_cast<std::size_t>(pos[static_cast<std::size_t>(u)]) < depth)
        lo = std::max(lo, w - x[static_cast<std::size_t>(u)]);
    for (int val = lo; val <= std::max(lo, cap[static_cast<std::size_t>(v)]); ++val) {
      if (sum + val >= best) break;
      x[static_cast<std::size_t>(v)] = val;
      search(depth + 1, sum + val);
    }
    x[static_cast<std::size_t>(v)] = 0;
  }
};

}  // namespace

int weighted_mvc(std::span<const WeightedEdge> edges) {
  std::map<int, int> index;
  for (const auto& e : edges) {
    if (e.weight <= 0) continue;
    index.emplace(e.u, 0);
    index.emplace(e.v, 0);
  }
  int n = 0;
  for (auto& [v, i] : index) i = n++;
  std::vector<std::map<int, int>> merged(static_cast<std::size_t>(n));
  for (const auto& e : edges) {
    if (e.weight <= 0 || e.u == e.v) continue;
    const int u = index[e.u], v = index[e.v];
    auto& w1 = merged[static_cast<std::size_t>(u)][v];
    w1 = std::max(w1, e.weight);
    auto& w2 = merged[static_cast<std::size_t>(v)][u];
    w2 = std::max(w2, e.weight);
  }

  // connected components are independent
  std::vector<int> comp(static_cast<std::size_t>(n), -1);
  int total = 0;
  for (int s = 0; s < n; ++s) {
    if (comp[static_cast<std::size_t>(s)] >= 0) continue;
    std::vector<int> members{s};
    comp[static_cast<std::size_t>(s)] = s;
    for (std::size_t k = 0; k < members.size(); ++k)
      for (auto [u, w] : merged[static_cast<std::size_t>(members[k])])
        if (comp[static_cast<std::size_t>(u)] < 0) {
          comp[static_cast<std::size_t>(u)] = s;
          members.push_back(u);
        }
    if (members.size() == 1) continue;

    MvcSolver solver;
    const std::size_t m = members.size();
    std::map<int, int> local;
    for (std::size_t k = 0; k < m; ++k) local[members[k]] = static_cast<int>(k);
    solver.adj.resize(m);
    solver.cap.assign(m, 0);
    for (std::size_t k = 0; k < m; ++k)
      for (auto [u, w] : merged[static_cast<std::size_t>(members[k])]) {
        solver.adj[k].emplace_back(local[u], w);
        solver.cap[k] = std::max(solver.cap[k], w);
      }
    solver.order.resize(m);
    std::iota(solver.order.begin(), solver.order.end(), 0);
    std::stable_sort(solver.order.begin(), solver.order.end(),
                     [&](int p, int q) { return solver.adj[static_cast<std::size_t>(p)].size() > solver.adj[static_cast<std::size_t>(q)].size(); });
    solver.pos.assign(m, 0);
    for (std::size_t k = 0; k < m; ++k) solver.pos[static_cast<std::size_t>(solver.order[k])] = static_cast<int>(k);
    solver.x.assign(m, 0);
    // upper bound: every vertex at its max incident weight
    solver.best = std::accumulate(solver.cap.begin(), solver.cap.end(), 0) + 1;
    solver.search(0, 0);
    total += solver.best;
  }
  return total;
}

}  // namespace mlcbs
