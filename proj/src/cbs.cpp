#include "mlcbs/cbs.hpp"

#include <algorithm>
#include <ostream>
#include <set>
#include <tuple>

namespace mlcbs {

const char* to_string(Cardinality c) {
  switch (c) {
    case Cardinality::cardinal: return "cardinal";
    case Cardinality::semi_cardinal: return "semi-cardinal";
    case Cardinality::non_cardinal: return "non-cardinal";
    case Cardinality::unclassified: break;
  }
  return "unclassified";
}

bool conflict_less(const Conflict& a, const Conflict& b) {
  return std::tie(a.time, a.agent1, a.agent2, a.kind, a.from, a.to) <
         std::tie(b.time, b.agent1, b.agent2, b.kind, b.from, b.to);
}

namespace {

void pair_conflicts(const Path& p, const Path& q, int a, int b, std::vector<Conflict>& out) {
  // a < b
  const int horizon = std::max(p.cost(), q.cost());
  for (int t = 0; t <= horizon; ++t) {
    const Vertex u = p.at(t);
    if (u == q.at(t)) out.push_back({ConflictKind::vertex, a, b, u, u, t});
    if (t < horizon) {
      const Vertex v = p.at(t + 1);
      if (u != v && q.at(t) == v && q.at(t + 1) == u) out.push_back({ConflictKind::edge, a, b, u, v, t});
    }
  }
}

std::vector<int> constraint_key(int tag, int extra, std::span<const Constraint> constraints) {
  std::vector<int> key{tag, extra};
  key.reserve(2 + 4 * constraints.size());
  for (const auto& c : constraints) {
    key.push_back(static_cast<int>(c.kind));
    key.push_back(c.from);
    key.push_back(c.to);
    key.push_back(c.time);
  }
  return key;
}

}  // namespace

std::vector<Conflict> detect_conflicts(std::span<const Path> paths) {
  std::vector<Conflict> out;
  for (std::size_t i = 0; i < paths.size(); ++i)
    for (std::size_t j = i + 1; j < paths.size(); ++j)
      pair_conflicts(paths[i], paths[j], static_cast<int>(i), static_cast<int>(j), out);
  std::sort(out.begin(), out.end(), conflict_less);
  return out;
}

std::vector<Conflict> detect_conflicts_with(std::span<const Path> paths, int agent) {
  std::vector<Conflict> out;
  const auto a = static_cast<std::size_t>(agent);
  for (std::size_t j = 0; j < paths.size(); ++j) {
    if (j == a) continue;
    if (j < a) {
      pair_conflicts(paths[j], paths[a], static_cast<int>(j), agent, out);
    } else {
      pair_conflicts(paths[a], paths[j], agent, static_cast<int>(j), out);
    }
  }
  std::sort(out.begin(), out.end(), conflict_less);
  return out;
}

Cardinality classify_conflict(const Conflict& conflict, const Mdd& mdd1, const Mdd& mdd2) {
  const int t = conflict.time;
  auto singleton = [&](const Mdd& m) {
    if (conflict.kind == ConflictKind::vertex) return mdd_width(m, t) == 1;
    return mdd_width(m, t) == 1 && mdd_width(m, t + 1) == 1;
  };
  const bool s1 = singleton(mdd1);
  const bool s2 = singleton(mdd2);
  if (s1 && s2) return Cardinality::cardinal;
  if (s1 || s2) return Cardinality::semi_cardinal;
  return Cardinality::non_cardinal;
}

std::pair<Constraint, Constraint> split(const Conflict& c) {
  if (c.kind == ConflictKind::vertex) {
    return {vertex_constraint(c.agent1, c.from, c.time), vertex_constraint(c.agent2, c.from, c.time)};
  }
  return {edge_constraint(c.agent1, c.from, c.to, c.time), edge_constraint(c.agent2, c.to, c.from, c.time)};
}

int CTNode::pair_weight(int a, int b) const {
  if (a > b) std::swap(a, b);
  const auto it = pair_weights.find({a, b});
  return it == pair_weights.end() ? 0 : it->second;
}

int CTNode::makespan() const {
  int m = 0;
  for (const auto& p : paths) m = std::max(m, p.cost());
  return m;
}

void ResolutionHistory::record(const Conflict& c) {
  ++per_agent[static_cast<std::size_t>(c.agent1)];
  ++per_agent[static_cast<std::size_t>(c.agent2)];
  ++per_vertex[static_cast<std::size_t>(c.from)];
  if (c.kind == ConflictKind::edge) ++per_vertex[static_cast<std::size_t>(c.to)];
}

Search::Search(const Instance& instance, SearchLimits limits)
    : instance_(instance),
      limits_(limits),
      history_(instance.agents(), instance.map->size()),
      started_(std::chrono::steady_clock::now()) {
  validate_instance(instance_);
  for (const auto& task : instance_.tasks) goal_distance_.push_back(bfs_distance(map(), task.goal));
  individual_cost_.assign(static_cast<std::size_t>(agents()), 0);
}

double Search::elapsed_s() const {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - started_).count();
}

bool Search::out_of_time() const { return elapsed_s() >= limits_.time_limit_s; }

std::optional<CTNode> Search::make_root() {
  CTNode root;
  for (int a = 0; a < agents(); ++a) {
    const auto& task = instance_.tasks[static_cast<std::size_t>(a)];
    const CollisionTable avoid(root.paths, -1);
    auto path = plan_path(map(), task.start, task.goal, a, {}, &avoid, &goal_distance(a));
    if (!path) return std::nullopt;
    individual_cost_[static_cast<std::size_t>(a)] = path->cost();
    root.g += path->cost();
    root.paths.push_back(std::move(*path));
  }
  root.conflicts = detect_conflicts(root.paths);
  classify(root);
  root.h = wdg_heuristic(root);
  return root;
}

const CTNode& Search::add_node(CTNode node) {
  node.id = arena_.size();
  arena_.push_back(std::move(node));
  return arena_.back();
}

std::vector<Constraint> Search::constraints_for(const CTNode& node, int agent) const {
  std::vector<Constraint> out;
  if (node.constraint && node.constraint->agent == agent) out.push_back(*node.constraint);
  auto parent = node.parent;
  while (parent) {
    const CTNode& p = arena_[static_cast<std::size_t>(*parent)];
    if (p.constraint && p.constraint->agent == agent) out.push_back(*p.constraint);
    parent = p.parent;
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::shared_ptr<const Mdd> Search::mdd(const CTNode& node, int agent) {
  const auto constraints = constraints_for(node, agent);
  const int cost = node.paths[static_cast<std::size_t>(agent)].cost();
  auto key = constraint_key(agent, cost, constraints);
  if (const auto it = mdd_cache_.find(key); it != mdd_cache_.end()) return it->second;
  const auto& task = instance_.tasks[static_cast<std::size_t>(agent)];
  auto built = std::make_shared<const Mdd>(
      build_mdd(map(), task.start, task.goal, agent, cost, constraints, &goal_distance(agent)));
  if (mdd_cache_.size() > 200'000) mdd_cache_.clear();
  mdd_cache_.emplace(std::move(key), built);
  return built;
}

void Search::classify(CTNode& node) {
  for (auto& c : node.conflicts) {
    if (c.cardinality != Cardinality::unclassified) continue;
    const auto m1 = mdd(node, c.agent1);
    const auto m2 = mdd(node, c.agent2);
    c.cardinality = classify_conflict(c, *m1, *m2);
  }
}

int Search::pair_delta(const CTNode& node, int a, int b) {
  const auto ca = constraints_for(node, a);
  const auto cb = constraints_for(node, b);
  auto key = constraint_key(a, b, ca);
  key.push_back(-1);
  for (const auto& c : cb) {
    key.push_back(static_cast<int>(c.kind));
    key.push_back(c.from);
    key.push_back(c.to);
    key.push_back(c.time);
  }
  if (const auto it = pair_cache_.find(key); it != pair_cache_.end()) return it->second;

  const int base = node.paths[static_cast<std::size_t>(a)].cost() + node.paths[static_cast<std::size_t>(b)].cost();
  const auto joint = solve_two_agents(map(), instance_.tasks[static_cast<std::size_t>(a)],
                                      instance_.tasks[static_cast<std::size_t>(b)], ca, cb, goal_distance(a),
                                      goal_distance(b), limits_.wdg_pair_budget);
  int delta = 0;
  if (joint) {
    delta = std::max(0, *joint - base);
  } else {
    for (const auto& c : node.conflicts)
      if (c.agent1 == a && c.agent2 == b && c.cardinality == Cardinality::cardinal) delta = 1;
  }
  pair_cache_.emplace(std::move(key), delta);
  return delta;
}

int Search::wdg_heuristic(CTNode& node) {
  classify(node);
  node.pair_weights.clear();
  std::vector<WeightedEdge> edges;
  for (const auto& c : node.conflicts) {
    const std::pair<int, int> pair{c.agent1, c.agent2};
    if (node.pair_weights.count(pair)) continue;
    const int w = pair_delta(node, c.agent1, c.agent2);
    node.pair_weights[pair] = w;
    if (w > 0) edges.push_back({c.agent1, c.agent2, w});
  }
  return weighted_mvc(edges);
}

std::optional<CTNode> Search::expand_child(const CTNode& parent, const Constraint& constraint) {
  const int a = constraint.agent;
  const auto ai = static_cast<std::size_t>(a);
  CTNode child;
  child.parent = parent.id;
  child.constraint = constraint;
  child.depth = parent.depth + 1;

  const auto constraints = constraints_for(child, a);
  const CollisionTable avoid(parent.paths, a);
  const auto& task = instance_.tasks[ai];
  auto path = plan_path(map(), task.start, task.goal, a, constraints, &avoid, &goal_distance(a));
  if (!path) return std::nullopt;

  child.paths = parent.paths;
  child.g = parent.g - parent.paths[ai].cost() + path->cost();
  child.paths[ai] = std::move(*path);

  for (const auto& c : parent.conflicts)
    if (!c.involves(a)) child.conflicts.push_back(c);
  for (auto& c : detect_conflicts_with(child.paths, a)) child.conflicts.push_back(c);
  std::sort(child.conflicts.begin(), child.conflicts.end(), conflict_less);
  classify(child);
  // pathmax keeps f monotone along every branch
  child.h = std::max(wdg_heuristic(child), parent.f() - child.g);
  return child;
}

SolveResult Search::solve(SelectionPolicy& policy, const ExpansionObserver& observer) {
  started_ = std::chrono::steady_clock::now();
  SolveResult result;
  RunRecord& rec = result.record;
  double oracle_time = 0.0;
  auto finish = [&]() {
    rec.runtime_s = elapsed_s();
    rec.oracle_time_s = oracle_time;
    return result;
  };

  auto root = make_root();
  if (!root) return finish();
  // (f, conflicts, -id): best f, then fewer conflicts, then most recent
  std::set<std::tuple<int, std::size_t, long long>> open;
  auto push = [&](CTNode node) {
    const CTNode& stored = add_node(std::move(node));
    ++rec.ct_generated;
    open.emplace(stored.f(), stored.conflicts.size(), -static_cast<long long>(stored.id));
  };
  push(std::move(*root));

  while (!open.empty()) {
    if (out_of_time() || rec.ct_expanded >= limits_.node_limit) return finish();
    const auto top = *open.begin();
    open.erase(open.begin());
    const auto id = static_cast<std::uint64_t>(-std::get<2>(top));
    ++rec.ct_expanded;
    const CTNode& current = node(id);
    if (current.conflicts.empty()) {
      rec.solved = true;
      rec.cost = current.g;
      result.solution = current.paths;
      return finish();
    }

    const auto t0 = std::chrono::steady_clock::now();
    Selection selection = policy.select(*this, current);
    oracle_time += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (out_of_time()) return finish();
    if (observer) observer(*this, current, selection);

    const Conflict conflict = current.conflicts.at(selection.index);
    history_.record(conflict);
    std::optional<CTNode> left, right;
    if (selection.children) {
      left = std::move(selection.children->first);
      right = std::move(selection.children->second);
    } else {
      const auto [c1, c2] = split(conflict);
      left = expand_child(current, c1);
      right = expand_child(node(id), c2);
    }
    if (left) push(std::move(*left));
    if (right) push(std::move(*right));
  }
  return finish();
}

void write_solution(std::ostream& out, std::span<const Path> paths) {
  for (const auto& p : paths) {
    for (std::size_t t = 0; t < p.steps.size(); ++t) out << (t ? " " : "") << p.steps[t];
    out << '\n';
  }
}

bool is_valid_solution(const Instance& instance, std::span<const Path> paths) {
  if (paths.size() != instance.tasks.size()) return false;
  const GridMap& map = *instance.map;
  for (std::size_t i = 0; i < paths.size(); ++i) {
    const auto& s = paths[i].steps;
    if (s.empty() || s.front() != instance.tasks[i].start || s.back() != instance.tasks[i].goal) return false;
    for (std::size_t t = 0; t < s.size(); ++t) {
      if (!map.passable(s[t])) return false;
      if (t > 0 && s[t] != s[t - 1] && !map.adjacent(s[t - 1], s[t])) return false;
    }
  }
  return detect_conflicts(paths).empty();
}

}  // namespace mlcbs
