#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>

#include "brute_force.hpp"
#include "mlcbs/oracle.hpp"

using namespace mlcbs;

namespace {

Conflict conflict(Cardinality cls, int t, int a1 = 0, int a2 = 1, Vertex v = 0) {
  Conflict c{ConflictKind::vertex, a1, a2, v, v, t};
  c.cardinality = cls;
  return c;
}

CTNode with_conflicts(std::vector<Conflict> cs) {
  CTNode n;
  n.conflicts = std::move(cs);
  return n;
}

// Busy nodes from a few guided solves on a small random map.
template <typename Fn>
void for_busy_nodes(int want, Fn&& fn) {
  int seen = 0;
  for (std::uint64_t trial = 0; seen < want && trial < 40; ++trial) {
    auto map = std::make_shared<const GridMap>(random_map(8, 8, 12, trial));
    const Instance inst = generate_instance(map, 6, trial + 11);
    SearchLimits limits;
    limits.node_limit = 10;
    Search search(inst, limits);
    O0Selector o0(trial);
    search.solve(o0, [&](Search& s, const CTNode& node, const Selection&) {
      if (seen >= want || node.conflicts.size() < 2) return;
      ++seen;
      fn(s, node);
    });
  }
  CHECK(seen == want);
}

}  // namespace

TEST_CASE("o0 ranks class before time") {
  const CTNode n = with_conflicts({conflict(Cardinality::non_cardinal, 1), conflict(Cardinality::cardinal, 9)});
  CHECK(rank_o0(n, 0).ranking.front() == 1);
  const CTNode m = with_conflicts({conflict(Cardinality::cardinal, 7), conflict(Cardinality::cardinal, 2)});
  CHECK(rank_o0(m, 0).ranking.front() == 1);
  const CTNode s = with_conflicts({conflict(Cardinality::semi_cardinal, 0), conflict(Cardinality::non_cardinal, 0),
                                   conflict(Cardinality::cardinal, 30)});
  CHECK(rank_o0(s, 0).ranking == std::vector<std::size_t>{2, 0, 1});
}

TEST_CASE("o0 ties are fixed by the seed") {
  const CTNode n = with_conflicts({conflict(Cardinality::cardinal, 3, 0, 1, 5), conflict(Cardinality::cardinal, 3, 2, 3, 8)});
  for (std::uint64_t seed = 0; seed < 20; ++seed) CHECK(rank_o0(n, seed).ranking == rank_o0(n, seed).ranking);
  std::set<std::size_t> firsts;
  for (std::uint64_t seed = 0; seed < 20; ++seed) firsts.insert(rank_o0(n, seed).ranking.front());
  CHECK(firsts.size() == 2);
}

TEST_CASE("lookahead values with infeasible children") {
  CTNode a;
  a.g = 11;
  a.h = 0;
  CTNode b = a;
  CHECK(o1_value(a, b) == 11);
  CTNode c;
  c.g = 12;
  c.h = 1;
  CHECK(o1_value(std::nullopt, c) == 13);
  CHECK(o1_value(c, std::nullopt) == 13);
  CHECK(o1_value(std::nullopt, std::nullopt) == -kInfinity);

  CTNode two, three;
  two.conflicts.resize(2);
  three.conflicts.resize(3);
  CHECK(o2_value(two, three) == 2);
  CHECK(o2_value(std::nullopt, three) == 3);
  CHECK(o2_value(std::nullopt, std::nullopt) == kInfinity);
  CHECK(o2_value(CTNode{}, three) == 0);
}

TEST_CASE("o1 on a corridor root equals hand-expanded children") {
  auto map = brute::grid({".....", "@@.@@"});
  Instance inst;
  inst.map = map;
  inst.tasks = {{0, 4}, {4, 0}};
  Search search(inst);
  const CTNode& root = search.add_node(*search.make_root());
  const auto scored = score_o1(search, root, 0);
  REQUIRE(scored.scores.size() == root.conflicts.size());
  for (std::size_t i = 0; i < root.conflicts.size(); ++i) {
    const auto [c1, c2] = split(root.conflicts[i]);
    const auto l = search.expand_child(root, c1);
    const auto r = search.expand_child(root, c2);
    CHECK(scored.scores[i] == o1_value(l, r));
    CHECK(scored.children[i][0].feasible == l.has_value());
  }
  // the lookahead bound never drops below the parent's f
  for (double v : scored.scores) CHECK(v >= root.f());
}

TEST_CASE("o1 and o2 select the best exhaustively scored conflict") {
  for_busy_nodes(15, [](Search& s, const CTNode& node) {
    std::vector<double> v1, v2;
    for (const auto& c : node.conflicts) {
      const auto [c1, c2] = split(c);
      const auto l = s.expand_child(node, c1);
      const auto r = s.expand_child(node, c2);
      v1.push_back(o1_value(l, r));
      v2.push_back(o2_value(l, r));
    }
    LookaheadSelector o1(LookaheadSelector::Mode::o1, 4), o2(LookaheadSelector::Mode::o2, 4);
    const auto s1 = o1.select(s, node);
    const auto s2 = o2.select(s, node);
    CHECK(s1.scores == v1);
    CHECK(s2.scores == v2);
    CHECK(v1[s1.index] == *std::max_element(v1.begin(), v1.end()));
    CHECK(v2[s2.index] == *std::min_element(v2.begin(), v2.end()));
  });
}

TEST_CASE("lookahead children equal fresh expansions") {
  for_busy_nodes(10, [](Search& s, const CTNode& node) {
    LookaheadSelector o1(LookaheadSelector::Mode::o1, 1);
    const auto sel = o1.select(s, node);
    REQUIRE(sel.children);
    const auto [c1, c2] = split(node.conflicts[sel.index]);
    const auto l = s.expand_child(node, c1);
    const auto r = s.expand_child(node, c2);
    REQUIRE(l.has_value() == sel.children->first.has_value());
    REQUIRE(r.has_value() == sel.children->second.has_value());
    auto same = [](const CTNode& a, const CTNode& b) {
      return a.paths == b.paths && a.g == b.g && a.h == b.h && a.conflicts == b.conflicts &&
             a.pair_weights == b.pair_weights && a.constraint == b.constraint && a.parent == b.parent &&
             a.depth == b.depth;
    };
    if (l) CHECK(same(*l, *sel.children->first));
    if (r) CHECK(same(*r, *sel.children->second));
  });
}

TEST_CASE("o0 respects the class order on real nodes") {
  for_busy_nodes(20, [](Search& s, const CTNode& node) {
    O0Selector o0(9);
    const auto& picked = node.conflicts[o0.select(s, node).index];
    for (const auto& c : node.conflicts) CHECK(static_cast<int>(picked.cardinality) <= static_cast<int>(c.cardinality));
  });
}

TEST_CASE("every selector returns a member of a singleton set") {
  auto map = brute::grid({"...", "@.@"});
  Instance inst;
  inst.map = map;
  inst.tasks = {{0, 2}, {2, 0}};
  Search search(inst);
  const CTNode& root = search.add_node(*search.make_root());
  REQUIRE(root.conflicts.size() >= 1);
  CTNode single = root;
  single.conflicts.resize(1);
  RankingModel model;
  model.weights[2] = 1.0;
  RandomSelector random(3);
  O0Selector o0(3);
  LookaheadSelector o1(LookaheadSelector::Mode::o1, 3), o2(LookaheadSelector::Mode::o2, 3);
  LearnedSelector learned(model, 3);
  for (SelectionPolicy* p : std::initializer_list<SelectionPolicy*>{&random, &o0, &o1, &o2, &learned})
    CHECK(p->select(search, single).index == 0);
  CHECK_THROWS(o0.select(search, CTNode{}));
}

TEST_CASE("learned selector on the cardinal indicator picks a cardinal") {
  RankingModel model;
  model.weights[2] = 1.0;
  int with_cardinal = 0;
  for_busy_nodes(25, [&](Search& s, const CTNode& node) {
    const bool any = std::any_of(node.conflicts.begin(), node.conflicts.end(),
                                 [](const Conflict& c) { return c.cardinality == Cardinality::cardinal; });
    LearnedSelector learned(model, 0);
    const auto sel = learned.select(s, node);
    if (any) {
      ++with_cardinal;
      CHECK(node.conflicts[sel.index].cardinality == Cardinality::cardinal);
    }
  });
  CHECK(with_cardinal > 0);
}

TEST_CASE("scaling the model keeps the learned choice") {
  RankingModel model;
  for (std::size_t k = 0; k < kFeatureCount; ++k) model.weights[k] = std::sin(static_cast<double>(k) * 1.7);
  RankingModel scaled = model;
  for (auto& w : scaled.weights) w *= 37.5;
  for_busy_nodes(20, [&](Search& s, const CTNode& node) {
    LearnedSelector a(model, 2), b(scaled, 2);
    CHECK(a.select(s, node).index == b.select(s, node).index);
  });
}

TEST_CASE("random selector is reproducible") {
  const CTNode n = with_conflicts({conflict(Cardinality::cardinal, 1), conflict(Cardinality::cardinal, 2),
                                   conflict(Cardinality::cardinal, 3), conflict(Cardinality::cardinal, 4)});
  auto map = brute::grid({".."});
  Instance inst;
  inst.map = map;
  inst.tasks = {{0, 1}};
  Search search(inst);
  RandomSelector a(8), b(8);
  std::set<std::size_t> picks;
  for (int i = 0; i < 30; ++i) {
    const auto x = a.select(search, n).index;
    CHECK(x == b.select(search, n).index);
    picks.insert(x);
  }
  CHECK(picks.size() > 1);
}

TEST_CASE("selector specs") {
  CHECK(make_selector("random", 1)->name() == "random");
  CHECK(make_selector("o0", 1)->name() == "o0");
  CHECK(make_selector("o1", 1)->name() == "o1");
  CHECK(make_selector("o2", 1)->name() == "o2");
  CHECK_THROWS_AS(make_selector("o3", 1), std::invalid_argument);
  CHECK_THROWS(make_selector("model:/nonexistent/model.txt", 1));
}
