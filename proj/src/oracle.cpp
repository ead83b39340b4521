#include "mlcbs/oracle.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <tuple>

#include "mlcbs/features.hpp"

namespace mlcbs {

std::uint64_t tie_key(const Conflict& c, std::uint64_t seed) {
  std::uint64_t h = splitmix64(seed);
  for (std::uint64_t v : {static_cast<std::uint64_t>(c.kind), static_cast<std::uint64_t>(c.agent1),
                          static_cast<std::uint64_t>(c.agent2), static_cast<std::uint64_t>(c.from),
                          static_cast<std::uint64_t>(c.to), static_cast<std::uint64_t>(c.time)})
    h = hash_combine(h, v);
  return h;
}

bool o0_before(const Conflict& a, const Conflict& b, std::uint64_t seed) {
  const auto ka = std::make_tuple(static_cast<int>(a.cardinality), a.time, tie_key(a, seed));
  const auto kb = std::make_tuple(static_cast<int>(b.cardinality), b.time, tie_key(b, seed));
  if (ka != kb) return ka < kb;
  return conflict_less(a, b);
}

namespace {

void require_conflicts(const CTNode& node) {
  if (node.conflicts.empty()) throw std::logic_error("conflict selection on a node without conflicts");
}

// Larger score first when `descending`, then the O0 order.
std::vector<std::size_t> rank_by(const CTNode& node, const std::vector<double>& scores, bool descending,
                                 std::uint64_t seed) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
    if (scores[i] != scores[j]) return descending ? scores[i] > scores[j] : scores[i] < scores[j];
    return o0_before(node.conflicts[i], node.conflicts[j], seed);
  });
  return order;
}

ChildSummary summarize(const std::optional<CTNode>& child) {
  if (!child) return {};
  return {true, child->g, child->h, child->conflicts.size()};
}

ScoredConflicts lookahead(Search& search, const CTNode& node, std::uint64_t seed, bool o1,
                          std::vector<Lookahead>* kept) {
  require_conflicts(node);
  ScoredConflicts out;
  const std::size_t n = node.conflicts.size();
  out.scores.assign(n, o1 ? -kInfinity : kInfinity);
  out.children.assign(n, {});
  if (kept) kept->assign(n, {});
  for (std::size_t i = 0; i < n; ++i) {
    if (search.out_of_time()) break;
    const auto [c1, c2] = split(node.conflicts[i]);
    Lookahead la{search.expand_child(node, c1), search.expand_child(node, c2)};
    out.scores[i] = o1 ? o1_value(la.left, la.right) : o2_value(la.left, la.right);
    out.children[i] = {summarize(la.left), summarize(la.right)};
    if (kept) (*kept)[i] = std::move(la);
  }
  out.ranking = rank_by(node, out.scores, o1, seed);
  return out;
}

}  // namespace

ScoredConflicts rank_o0(const CTNode& node, std::uint64_t seed) {
  require_conflicts(node);
  ScoredConflicts out;
  for (const auto& c : node.conflicts)
    out.scores.push_back(-(static_cast<double>(c.cardinality) * 1e9 + static_cast<double>(c.time)));
  out.ranking = rank_by(node, out.scores, true, seed);
  return out;
}

double o1_value(const std::optional<CTNode>& left, const std::optional<CTNode>& right) {
  double v = kInfinity;
  if (left) v = std::min(v, static_cast<double>(left->f()));
  if (right) v = std::min(v, static_cast<double>(right->f()));
  return v == kInfinity ? -kInfinity : v;
}

double o2_value(const std::optional<CTNode>& left, const std::optional<CTNode>& right) {
  double v = kInfinity;
  if (left) v = std::min(v, static_cast<double>(left->conflicts.size()));
  if (right) v = std::min(v, static_cast<double>(right->conflicts.size()));
  return v;
}

ScoredConflicts score_o1(Search& search, const CTNode& node, std::uint64_t seed, std::vector<Lookahead>* kept) {
  return lookahead(search, node, seed, true, kept);
}

ScoredConflicts score_o2(Search& search, const CTNode& node, std::uint64_t seed, std::vector<Lookahead>* kept) {
  return lookahead(search, node, seed, false, kept);
}

Selection RandomSelector::select(Search&, const CTNode& node) {
  require_conflicts(node);
  Selection s;
  s.index = static_cast<std::size_t>(rng_.index(node.conflicts.size()));
  return s;
}

Selection O0Selector::select(Search&, const CTNode& node) {
  auto scored = rank_o0(node, seed_);
  Selection s;
  s.index = scored.ranking.front();
  s.scores = std::move(scored.scores);
  return s;
}

Selection LookaheadSelector::select(Search& search, const CTNode& node) {
  std::vector<Lookahead> kept;
  auto scored = mode_ == Mode::o1 ? score_o1(search, node, seed_, &kept) : score_o2(search, node, seed_, &kept);
  Selection s;
  s.index = scored.ranking.front();
  s.scores = std::move(scored.scores);
  s.children.emplace(std::move(kept[s.index].left), std::move(kept[s.index].right));
  return s;
}

Selection LearnedSelector::select(Search& search, const CTNode& node) {
  require_conflicts(node);
  const auto features = node_features(search, node);
  Selection s;
  for (const auto& f : features) s.scores.push_back(predict(model_, f));
  s.index = rank_by(node, s.scores, true, seed_).front();
  return s;
}

std::unique_ptr<SelectionPolicy> make_selector(const std::string& spec, std::uint64_t seed) {
  if (spec == "random") return std::make_unique<RandomSelector>(seed);
  if (spec == "o0") return std::make_unique<O0Selector>(seed);
  if (spec == "o1") return std::make_unique<LookaheadSelector>(LookaheadSelector::Mode::o1, seed);
  if (spec == "o2") return std::make_unique<LookaheadSelector>(LookaheadSelector::Mode::o2, seed);
  if (spec.rfind("model:", 0) == 0) return std::make_unique<LearnedSelector>(load_model(spec.substr(6)), seed, spec);
  throw std::invalid_argument("unknown selector: " + spec);
}

}  // namespace mlcbs
