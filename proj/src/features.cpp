#include "mlcbs/features.hpp"

#include <algorithm>
#include <deque>
#include <sstream>
#include <stdexcept>

namespace mlcbs {

namespace {

std::uint64_t te_key(Vertex v, int t) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(t)) << 32) | static_cast<std::uint32_t>(v);
}

double ratio(double num, double den) { return den == 0.0 ? 0.0 : num / den; }

std::vector<Vertex> conflict_vertices(const Conflict& c) {
  if (c.kind == ConflictKind::vertex) return {c.from};
  std::vector<Vertex> vs{c.from, c.to};
  std::sort(vs.begin(), vs.end());
  return vs;
}

std::vector<TimedVertex> timed(const Conflict& c) {
  std::vector<TimedVertex> out;
  for (Vertex v : conflict_vertices(c)) out.emplace_back(v, c.time);
  return out;
}

}  // namespace

TimeExpandedBall::TimeExpandedBall(const GridMap& map, std::span<const TimedVertex> sources, int cap) : cap_(cap) {
  std::deque<TimedVertex> queue;
  for (const auto& s : sources) {
    if (dist_.emplace(te_key(s.first, s.second), 0).second) queue.push_back(s);
  }
  while (!queue.empty()) {
    const auto [v, t] = queue.front();
    queue.pop_front();
    const int d = dist_.at(te_key(v, t));
    if (d == cap_) continue;
    auto visit = [&](Vertex w, int tw) {
      if (tw < 0) return;
      if (dist_.emplace(te_key(w, tw), d + 1).second) queue.emplace_back(w, tw);
    };
    for (int dt : {-1, 1}) {
      visit(v, t + dt);
      for (Vertex w : map.neighbors(v)) visit(w, t + dt);
    }
  }
}

int TimeExpandedBall::distance(Vertex v, int t) const {
  if (t < 0) return cap_ + 1;
  const auto it = dist_.find(te_key(v, t));
  return it == dist_.end() ? cap_ + 1 : it->second;
}

int time_expanded_distance(const GridMap& map, std::span<const TimedVertex> sources,
                           std::span<const TimedVertex> targets, int cap) {
  const TimeExpandedBall ball(map, sources, cap);
  int best = cap + 1;
  for (const auto& q : targets) best = std::min(best, ball.distance(q.first, q.second));
  return best;
}

FeatureContext::FeatureContext(Search& search, const CTNode& node)
    : search_(search), node_(node), conflicts_per_agent_(static_cast<std::size_t>(search.agents()), 0) {
  for (const auto& c : node.conflicts) {
    ++conflicts_per_agent_[static_cast<std::size_t>(c.agent1)];
    ++conflicts_per_agent_[static_cast<std::size_t>(c.agent2)];
    conflict_vertices_.push_back(conflict_vertices(c));
  }
}

FeatureVector FeatureContext::extract_raw(std::size_t index) {
  const CTNode& node = node_;
  const Conflict& c = node.conflicts.at(index);
  const GridMap& map = search_.map();
  const auto& history = search_.history();
  const std::array<int, 2> agents{c.agent1, c.agent2};
  const int t = c.time;
  FeatureVector f{};
  auto set = [&f](int feature, double value) { f[static_cast<std::size_t>(feature - 1)] = value; };
  auto min_max_sum = [&set](int first, double a, double b) {
    set(first, std::min(a, b));
    set(first + 1, std::max(a, b));
    set(first + 2, a + b);
  };

  set(1, c.kind == ConflictKind::edge ? 1 : 0);
  set(2, c.kind == ConflictKind::vertex ? 1 : 0);
  set(3, c.cardinality == Cardinality::cardinal ? 1 : 0);
  set(4, c.cardinality == Cardinality::semi_cardinal ? 1 : 0);
  set(5, c.cardinality == Cardinality::non_cardinal ? 1 : 0);

  min_max_sum(6, history.per_agent[static_cast<std::size_t>(c.agent1)],
              history.per_agent[static_cast<std::size_t>(c.agent2)]);
  const auto& vc = conflict_vertices_[index];
  {
    double lo = 1e300, hi = -1e300, sum = 0;
    for (Vertex v : vc) {
      const double h = history.per_vertex[static_cast<std::size_t>(v)];
      lo = std::min(lo, h);
      hi = std::max(hi, h);
      sum += h;
    }
    set(9, lo);
    set(10, hi);
    set(11, sum);
  }
  min_max_sum(12, conflicts_per_agent_[static_cast<std::size_t>(c.agent1)],
              conflicts_per_agent_[static_cast<std::size_t>(c.agent2)]);

  set(15, t);
  set(16, ratio(t, node.makespan()));

  std::array<double, 2> cost{};
  for (std::size_t i = 0; i < 2; ++i) cost[i] = node.paths[static_cast<std::size_t>(agents[i])].cost();
  const double cmin = std::min(cost[0], cost[1]), cmax = std::max(cost[0], cost[1]);
  set(17, cmin);
  set(18, cmax);
  set(19, cost[0] + cost[1]);
  set(20, cmax - cmin);
  set(21, ratio(cmin, cmax));

  std::array<double, 2> extra{}, rel{}, share{}, slack{}, per_t{};
  for (std::size_t i = 0; i < 2; ++i) {
    const double ind = search_.individual_cost(agents[i]);
    extra[i] = cost[i] - ind;
    rel[i] = ratio(cost[i], ind);
    share[i] = ratio(cost[i], node.g);
    slack[i] = cost[i] - t;
    per_t[i] = ratio(cost[i], t);
  }
  auto min_max = [&set](int first, const std::array<double, 2>& v) {
    set(first, std::min(v[0], v[1]));
    set(first + 1, std::max(v[0], v[1]));
  };
  min_max(22, extra);
  min_max(24, rel);
  min_max(26, share);
  set(28, cost[0] > t && cost[1] > t ? 1 : 0);
  set(29, cost[0] <= t || cost[1] <= t ? 1 : 0);
  min_max(30, slack);
  min_max(32, per_t);

  const auto sources = timed(c);
  {
    const TimeExpandedBall ball(map, sources, 5);
    const DistanceField flat = bfs_distance(map, vc, 5);
    for (std::size_t j = 0; j < node.conflicts.size(); ++j) {
      if (j == index) continue;
      int dt = 6;
      for (const auto& q : timed(node.conflicts[j])) dt = std::min(dt, ball.distance(q.first, q.second));
      if (dt <= 5) f[static_cast<std::size_t>(33 + dt)] += 1;
      int dg = 6;
      for (Vertex v : conflict_vertices_[j]) dg = std::min(dg, flat[v]);
      if (dg <= 5) f[static_cast<std::size_t>(45 + dg)] += 1;
    }
  }
  {
    std::vector<std::array<bool, 6>> hit(node.paths.size(), std::array<bool, 6>{});
    for (const auto& q : sources) {
      const TimedVertex one[] = {q};
      const TimeExpandedBall ball(map, one, 5);
      for (std::size_t a = 0; a < node.paths.size(); ++a)
        for (int tau = std::max(0, t - 5); tau <= t + 5; ++tau) {
          const int d = ball.distance(node.paths[a].at(tau), tau);
          if (d <= 5) hit[a][static_cast<std::size_t>(d)] = true;
        }
    }
    for (const auto& h : hit)
      for (std::size_t w = 0; w < 6; ++w)
        if (h[w]) f[39 + w] += 1;
  }

  const auto m1 = search_.mdd(node, c.agent1);
  const auto m2 = search_.mdd(node, c.agent2);
  for (int j = 0; j < 5; ++j) {
    const int w1 = mdd_width(*m1, t - 2 + j), w2 = mdd_width(*m2, t - 2 + j);
    set(52 + 2 * j, std::min(w1, w2));
    set(53 + 2 * j, std::max(w1, w2));
  }
  const auto rings = ring_counts(map, vc);
  for (int w = 0; w < 5; ++w) set(62 + w, rings[static_cast<std::size_t>(w)]);
  set(67, node.pair_weight(c.agent1, c.agent2));
  return f;
}

std::vector<FeatureVector> extract_raw_all(Search& search, const CTNode& node) {
  FeatureContext ctx(search, node);
  std::vector<FeatureVector> out;
  out.reserve(node.conflicts.size());
  for (std::size_t i = 0; i < node.conflicts.size(); ++i) out.push_back(ctx.extract_raw(i));
  return out;
}

std::vector<FeatureVector> normalize(std::vector<FeatureVector> raw) {
  if (raw.empty()) return raw;
  for (std::size_t k = 0; k < kFeatureCount; ++k) {
    double lo = raw[0][k], hi = raw[0][k];
    for (const auto& v : raw) {
      lo = std::min(lo, v[k]);
      hi = std::max(hi, v[k]);
    }
    for (auto& v : raw) v[k] = hi > lo ? (v[k] - lo) / (hi - lo) : 0.0;
  }
  return raw;
}

std::vector<FeatureVector> node_features(Search& search, const CTNode& node) {
  return normalize(extract_raw_all(search, node));
}

FeatureMask category_mask(int category) {
  FeatureMask m;
  auto add = [&m](int a, int b) {
    for (int i = a; i <= b; ++i) m.set(static_cast<std::size_t>(i - 1));
  };
  switch (category) {
    case 1: add(3, 5); break;
    case 2: add(6, 8); break;
    case 3: add(12, 13); break;
    case 4: add(22, 25); break;
    case 5: add(52, 67); break;
    default: throw std::invalid_argument("feature category must be 1..5");
  }
  return m;
}

FeatureMask parse_feature_mask(const std::string& spec) {
  std::string body = spec;
  bool keep = false;
  if (body.rfind("keep:", 0) == 0) {
    keep = true;
    body = body.substr(5);
  }
  FeatureMask m;
  if (!body.empty() && body != "none") {
    std::stringstream ss(body);
    std::string item;
    while (std::getline(ss, item, ',')) {
      if (item.empty()) continue;
      if (item == "cat5n") {
        m.set(61);
        m.set(66);
      } else if (item.size() == 4 && item.rfind("cat", 0) == 0) {
        m |= category_mask(item[3] - '0');
      } else {
        const auto dash = item.find('-');
        std::size_t used = 0;
        int a = 0, b = 0;
        try {
          if (dash == std::string::npos) {
            a = b = std::stoi(item, &used);
            if (used != item.size()) throw std::invalid_argument(item);
          } else {
            a = std::stoi(item.substr(0, dash));
            b = std::stoi(item.substr(dash + 1));
          }
        } catch (const std::exception&) {
          throw std::invalid_argument("bad feature mask item: " + item);
        }
        if (a < 1 || b > static_cast<int>(kFeatureCount) || a > b)
          throw std::invalid_argument("feature index out of range: " + item);
        for (int i = a; i <= b; ++i) m.set(static_cast<std::size_t>(i - 1));
      }
    }
  }
  if (keep) m.flip();
  return m;
}

std::string format_feature_mask(const FeatureMask& mask) {
  std::string out;
  for (std::size_t i = 0; i < kFeatureCount; ++i) {
    if (!mask.test(i)) continue;
    if (!out.empty()) out += ',';
    out += std::to_string(i + 1);
  }
  return out.empty() ? "none" : out;
}

}  // namespace mlcbs
