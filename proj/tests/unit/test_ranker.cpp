#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sstream>

#include "mlcbs/ranker.hpp"
#include "planted.hpp"

using namespace mlcbs;

namespace {

NodeSample node(std::uint64_t qid, std::vector<std::vector<double>> rows, std::vector<int> labels) {
  NodeSample s;
  s.qid = qid;
  for (const auto& r : rows) {
    FeatureVector f{};
    std::copy(r.begin(), r.end(), f.begin());
    s.features.push_back(f);
  }
  s.labels = std::move(labels);
  for (int y : s.labels) s.scores.push_back(y);
  return s;
}

}  // namespace

TEST_CASE("swapped pairs") {
  const int y[] = {1, 0, 0};
  const double s[] = {0.2, 0.5, 0.1};
  CHECK(swapped_pairs(y, s) == 0.5);
  const double ordered[] = {3, 2, 1};
  CHECK(swapped_pairs(y, ordered) == 0.0);
  const double flat[] = {1, 1, 1};
  CHECK(swapped_pairs(y, flat) == 1.0);
  const int all[] = {1, 1};
  const double two[] = {1, 2};
  CHECK_THROWS_AS(swapped_pairs(all, two), std::invalid_argument);
}

TEST_CASE("predict") {
  RankingModel m;
  FeatureVector f{};
  for (std::size_t k = 0; k < kFeatureCount; ++k) f[k] = static_cast<double>(k) / 10.0;
  CHECK(predict(m, f) == 0.0);
  m.weights[66] = 1.0;
  CHECK(predict(m, f) == f[66]);
  m.weights[0] = 2.0;
  m.weights[3] = -1.0;
  CHECK(predict(m, f) == doctest::Approx(2 * 0.0 - 0.3 + 6.6));
  m.mask.set(66);
  CHECK(predict(m, f) == doctest::Approx(-0.3));

  RankingModel r;
  for (std::size_t k = 0; k < kFeatureCount; ++k) r.weights[k] = std::cos(static_cast<double>(k));
  FeatureVector g{};
  for (std::size_t k = 0; k < kFeatureCount; ++k) g[k] = std::sin(static_cast<double>(k));
  FeatureVector mix{};
  for (std::size_t k = 0; k < kFeatureCount; ++k) mix[k] = 2.5 * f[k] - 0.5 * g[k];
  CHECK(predict(r, mix) == doctest::Approx(2.5 * predict(r, f) - 0.5 * predict(r, g)));
}

TEST_CASE("separable one-dimensional pairs") {
  Dataset d;
  for (std::uint64_t q = 0; q < 30; ++q)
    d.samples.push_back(node(q, {{0.9 - 0.01 * static_cast<double>(q)}, {0.2}, {0.1}}, {1, 0, 0}));
  const RankingModel m = train(d, {});
  CHECK(m.weights[0] > 0.0);
  CHECK(evaluate(m, d).swapped_pairs_pct == 0.0);
  CHECK(m.C == 0.01);
}

TEST_CASE("training needs pairs") {
  Dataset d;
  d.samples.push_back(node(0, {{1.0}}, {1}));
  CHECK_THROWS_AS(train(d, {}), std::invalid_argument);
}

TEST_CASE("planted five-feature model is recovered") {
  const auto w = planted::model(3, 5);
  const Dataset tr = planted::generate(w, 300, 0.3, 1, 5);
  const Dataset te = planted::generate(w, 300, 0.3, 2, 5);
  const RankingModel m = train(tr, {});
  const auto ev = evaluate(m, te);
  CHECK(ev.swapped_pairs_pct == 0.0);
  CHECK(ev.top_pick_pct == 100.0);
}

TEST_CASE("objective is monotone over epochs and bounds the training loss") {
  const auto w = planted::model(8);
  const Dataset tr = planted::generate(w, 150, 0.0, 4);
  double prev = training_objective(FeatureVector{}, tr, 0.01);
  for (int epochs = 1; epochs <= 12; ++epochs) {
    TrainOptions opt;
    opt.epochs = epochs;
    opt.seed = 5;
    const RankingModel m = train(tr, opt);
    const double obj = training_objective(m.weights, tr, 0.01);
    CHECK(obj <= prev + 1e-9);
    prev = obj;
    double swapped = 0.0;
    for (const auto& s : tr.samples) {
      std::vector<double> sc;
      for (const auto& f : s.features) sc.push_back(predict(m, f));
      if (std::count(s.labels.begin(), s.labels.end(), 0) > 0) swapped += swapped_pairs(s.labels, sc);
    }
    CHECK(swapped <= obj + 1e-9);
  }
}

TEST_CASE("masked features get zero weight") {
  const auto w = planted::model(2);
  const Dataset tr = planted::generate(w, 100, 0.0, 9);
  TrainOptions opt;
  opt.mask = category_mask(1);
  const RankingModel m = train(tr, opt);
  CHECK(m.weights[2] == 0.0);
  CHECK(m.weights[3] == 0.0);
  CHECK(m.weights[4] == 0.0);
  CHECK(m.weights[0] != 0.0);
}

TEST_CASE("training is deterministic") {
  const auto w = planted::model(2);
  const Dataset tr = planted::generate(w, 80, 0.0, 9);
  TrainOptions opt;
  opt.seed = 11;
  CHECK(train(tr, opt) == train(tr, opt));
}

TEST_CASE("evaluation of exact and constant models") {
  Dataset d;
  d.samples.push_back(node(0, {{0.1}, {0.9}, {0.3}, {0.2}, {0.0}}, {0, 1, 0, 0, 0}));
  d.samples.push_back(node(1, {{0.7}}, {1}));
  RankingModel exact;
  exact.weights[0] = 1.0;
  auto ev = evaluate(exact, d);
  CHECK(ev.swapped_pairs_pct == 0.0);
  CHECK(ev.top_pick_pct == 100.0);
  CHECK(ev.nodes == 2);
  CHECK(ev.ranked_nodes == 1);
  CHECK(ev.random_pick_pct == doctest::Approx(100.0 * (0.2 + 1.0) / 2));

  RankingModel constant;
  ev = evaluate(constant, d);
  CHECK(ev.swapped_pairs_pct == 100.0);
  // tie chain falls to the lowest index, which is labelled 0
  CHECK(ev.top_pick_pct == 50.0);
}

TEST_CASE("tie chain prefers cardinal, then semi-cardinal, then earlier") {
  std::vector<FeatureVector> f(3, FeatureVector{});
  const double flat[] = {1, 1, 1};
  f[2][3] = 1;
  CHECK(pick_best(flat, f) == 2);
  f[1][2] = 1;
  CHECK(pick_best(flat, f) == 1);
  f[0][2] = 1;
  f[0][14] = 0.5;
  f[1][14] = 0.7;
  CHECK(pick_best(flat, f) == 0);
  const double ordered[] = {0, 5, 1};
  CHECK(pick_best(ordered, f) == 1);
}

TEST_CASE("feature importance ordering") {
  RankingModel m;
  m.weights[9] = -3.0;
  auto imp = feature_importance(m);
  CHECK(imp.front() == std::pair<int, double>{10, -3.0});
  CHECK(imp[1].first == 1);
  m.weights[4] = 3.0;
  imp = feature_importance(m);
  CHECK(imp[0].first == 5);
  CHECK(imp[1].first == 10);
}

TEST_CASE("model file round trip") {
  RankingModel m;
  for (std::size_t k = 0; k < kFeatureCount; ++k) m.weights[k] = std::sin(static_cast<double>(k) * 0.77) / 3.0;
  m.C = 0.01;
  m.mask = parse_feature_mask("cat1");
  for (std::size_t k = 2; k < 5; ++k) m.weights[k] = 0.0;
  std::stringstream ss;
  write_model(ss, m);
  const std::string first = ss.str();
  CHECK(first.rfind("dim 67 C 0.01 mask 3,4,5\n", 0) == 0);
  const RankingModel back = read_model(ss);
  CHECK(back == m);
  std::istringstream bad("dim 66 C 1 mask none\n0\n");
  CHECK_THROWS(read_model(bad));
  std::istringstream short_w("dim 67 C 1 mask none\n0 1 2\n");
  CHECK_THROWS(read_model(short_w));
}
