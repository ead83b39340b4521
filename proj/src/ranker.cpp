#include "mlcbs/ranker.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "mlcbs/random.hpp"

namespace mlcbs {

namespace {

using Vec = FeatureVector;

double dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < kFeatureCount; ++k) s += a[k] * b[k];
  return s;
}

// Label-1 minus label-0 feature differences of one node, masked.
struct PairBlock {
  std::vector<Vec> diffs;
};

std::vector<PairBlock> pair_blocks(const Dataset& dataset, const FeatureMask& mask) {
  std::vector<PairBlock> blocks;
  for (const auto& s : dataset.samples) {
    PairBlock b;
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (s.labels[i] != 1) continue;
      for (std::size_t j = 0; j < s.size(); ++j) {
        if (s.labels[j] != 0) continue;
        Vec d{};
        for (std::size_t k = 0; k < kFeatureCount; ++k) d[k] = mask.test(k) ? 0.0 : s.features[i][k] - s.features[j][k];
        b.diffs.push_back(d);
      }
    }
    if (!b.diffs.empty()) blocks.push_back(std::move(b));
  }
  return blocks;
}

double block_loss(const PairBlock& b, const Vec& w) {
  double sum = 0.0;
  for (const auto& d : b.diffs) sum += std::max(0.0, 1.0 - dot(w, d));
  return sum / static_cast<double>(b.diffs.size());
}

double objective(const std::vector<PairBlock>& blocks, const Vec& w, double C) {
  double j = 0.5 * C * dot(w, w);
  for (const auto& b : blocks) j += block_loss(b, w);
  return j;
}

Vec lerp(const Vec& a, const Vec& b, double theta) {
  Vec out{};
  for (std::size_t k = 0; k < kFeatureCount; ++k) out[k] = (1.0 - theta) * a[k] + theta * b[k];
  return out;
}

}  // namespace

double training_objective(const FeatureVector& weights, const Dataset& dataset, double C) {
  return objective(pair_blocks(dataset, FeatureMask{}), weights, C);
}

RankingModel train(const Dataset& dataset, const TrainOptions& options) {
  if (!(options.C > 0.0)) throw std::invalid_argument("C must be positive");
  if (options.epochs < 1) throw std::invalid_argument("epochs must be positive");
  const auto blocks = pair_blocks(dataset, options.mask);
  if (blocks.empty()) throw std::invalid_argument("dataset contains no ranked pairs");

  const double C = options.C;
  // Dual coordinate descent: pair p of node N has dual variable a_p in [0, 1 / (C |P_N|)]
  // and w = sum a_p d_p; each coordinate step is an exact minimization.
  struct Pair {
    const Vec* d;
    double upper;
    double sq;
    double alpha = 0.0;
  };
  std::vector<Pair> pairs;
  for (const auto& b : blocks)
    for (const auto& d : b.diffs)
      pairs.push_back({&d, 1.0 / (C * static_cast<double>(b.diffs.size())), dot(d, d)});
  Rng rng(options.seed);
  std::vector<std::size_t> order(pairs.size());
  std::iota(order.begin(), order.end(), 0);

  Vec w{}, best{};
  double best_obj = objective(blocks, best, C);
  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    rng.shuffle(std::span<std::size_t>(order));
    for (std::size_t idx : order) {
      Pair& p = pairs[idx];
      if (p.sq <= 0.0) continue;
      const double grad = dot(w, *p.d) - 1.0;
      const double next = std::clamp(p.alpha - grad / p.sq, 0.0, p.upper);
      const double delta = next - p.alpha;
      if (delta == 0.0) continue;
      p.alpha = next;
      for (std::size_t k = 0; k < kFeatureCount; ++k) w[k] += delta * (*p.d)[k];
    }
    // keep the primal objective monotone: line search from the best model toward w
    auto f = [&](double theta) { return objective(blocks, lerp(best, w, theta), C); };
    double lo = 0.0, hi = 1.0;
    const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = hi - phi * (hi - lo), x2 = lo + phi * (hi - lo);
    double f1 = f(x1), f2 = f(x2);
    for (int it = 0; it < 60; ++it) {
      if (f1 <= f2) {
        hi = x2;
        x2 = x1;
        f2 = f1;
        x1 = hi - phi * (hi - lo);
        f1 = f(x1);
      } else {
        lo = x1;
        x1 = x2;
        f1 = f2;
        x2 = lo + phi * (hi - lo);
        f2 = f(x2);
      }
    }
    double theta = 0.5 * (lo + hi), ft = f(theta);
    if (const double f_end = f(1.0); f_end <= ft) {
      theta = 1.0;
      ft = f_end;
    }
    if (ft < best_obj) {
      best = lerp(best, w, theta);
      best_obj = ft;
    }
  }
  RankingModel model;
  model.C = C;
  model.mask = options.mask;
  for (std::size_t k = 0; k < kFeatureCount; ++k) model.weights[k] = options.mask.test(k) ? 0.0 : best[k];
  return model;
}

double predict(const RankingModel& model, const FeatureVector& features) {
  double s = 0.0;
  for (std::size_t k = 0; k < kFeatureCount; ++k)
    if (!model.mask.test(k)) s += model.weights[k] * features[k];
  return s;
}

double swapped_pairs(std::span<const int> labels, std::span<const double> scores) {
  if (labels.size() != scores.size()) throw std::invalid_argument("labels and scores differ in length");
  std::size_t pairs = 0, swapped = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != 1) continue;
    for (std::size_t j = 0; j < labels.size(); ++j) {
      if (labels[j] != 0) continue;
      ++pairs;
      if (scores[i] <= scores[j]) ++swapped;
    }
  }
  if (pairs == 0) throw std::invalid_argument("no ranked pairs");
  return static_cast<double>(swapped) / static_cast<double>(pairs);
}

std::size_t pick_best(std::span<const double> scores, std::span<const FeatureVector> features) {
  if (scores.empty()) throw std::invalid_argument("nothing to pick from");
  std::size_t best = 0;
  for (std::size_t i = 1; i < scores.size(); ++i) {
    if (scores[i] != scores[best]) {
      if (scores[i] > scores[best]) best = i;
      continue;
    }
    if (features.size() != scores.size()) continue;
    const auto& a = features[i];
    const auto& b = features[best];
    if (a[2] != b[2]) {
      if (a[2] > b[2]) best = i;
    } else if (a[3] != b[3]) {
      if (a[3] > b[3]) best = i;
    } else if (a[14] < b[14]) {
      best = i;
    }
  }
  return best;
}

Evaluation evaluate(const RankingModel& model, const Dataset& dataset) {
  Evaluation ev;
  double swapped = 0.0, top = 0.0, random = 0.0;
  for (const auto& s : dataset.samples) {
    if (s.size() == 0) continue;
    std::vector<double> scores;
    for (const auto& f : s.features) scores.push_back(predict(model, f));
    ++ev.nodes;
    const std::size_t pick = pick_best(scores, s.features);
    top += s.labels[pick] == 1 ? 1.0 : 0.0;
    const auto positives = std::count(s.labels.begin(), s.labels.end(), 1);
    random += static_cast<double>(positives) / static_cast<double>(s.size());
    if (positives > 0 && static_cast<std::size_t>(positives) < s.size()) {
      ++ev.ranked_nodes;
      swapped += swapped_pairs(s.labels, scores);
    }
  }
  if (ev.nodes > 0) {
    ev.top_pick_pct = 100.0 * top / static_cast<double>(ev.nodes);
    ev.random_pick_pct = 100.0 * random / static_cast<double>(ev.nodes);
  }
  if (ev.ranked_nodes > 0) ev.swapped_pairs_pct = 100.0 * swapped / static_cast<double>(ev.ranked_nodes);
  return ev;
}

std::vector<std::pair<int, double>> feature_importance(const RankingModel& model) {
  std::vector<std::pair<int, double>> out;
  for (std::size_t k = 0; k < kFeatureCount; ++k) out.emplace_back(static_cast<int>(k) + 1, model.weights[k]);
  std::stable_sort(out.begin(), out.end(),
                   [](const auto& a, const auto& b) { return std::abs(a.second) > std::abs(b.second); });
  return out;
}

void write_model(std::ostream& out, const RankingModel& model) {
  out << "dim " << kFeatureCount << " C " << format_double(model.C) << " mask " << format_feature_mask(model.mask)
      << '\n';
  for (std::size_t k = 0; k < kFeatureCount; ++k) out << (k ? " " : "") << format_double(model.weights[k]);
  out << '\n';
}

RankingModel read_model(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty model file");
  std::istringstream head(line);
  std::string dim_kw, c_kw, mask_kw, c_text, mask_text;
  std::size_t dim = 0;
  if (!(head >> dim_kw >> dim >> c_kw >> c_text >> mask_kw >> mask_text) || dim_kw != "dim" || c_kw != "C" ||
      mask_kw != "mask")
    throw std::runtime_error("bad model header: " + line);
  if (dim != kFeatureCount) throw std::runtime_error("model dimension " + std::to_string(dim) + " is not 67");
  RankingModel model;
  model.C = parse_double(c_text);
  model.mask = parse_feature_mask(mask_text);
  if (!std::getline(in, line)) throw std::runtime_error("model file lacks weights");
  std::istringstream ws(line);
  std::string tok;
  std::size_t k = 0;
  while (ws >> tok) {
    if (k >= kFeatureCount) throw std::runtime_error("too many model weights");
    model.weights[k++] = parse_double(tok);
  }
  if (k != kFeatureCount) throw std::runtime_error("model has " + std::to_string(k) + " weights, expected 67");
  return model;
}

void save_model(const std::string& path, const RankingModel& model) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  write_model(out, model);
}

RankingModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  return read_model(in);
}

}  // namespace mlcbs
