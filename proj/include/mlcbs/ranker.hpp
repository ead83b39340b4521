#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mlcbs/dataset.hpp"
#include "mlcbs/features.hpp"

namespace mlcbs {

struct RankingModel {
  FeatureVector weights{};
  double C = 0.01;
  FeatureMask mask;
  bool operator==(const RankingModel&) const = default;
};

struct TrainOptions {
  double C = 0.01;
  FeatureMask mask;
  int epochs = 50;
  std::uint64_t seed = 0;
};

// Per-node pairwise hinge plus (C / 2) |w|^2, each node's hinge averaged over its pairs.
double training_objective(const FeatureVector& weights, const Dataset& dataset, double C);

// Dual coordinate descent over pairs in seeded order; the returned model's
// objective never increases from one epoch to the next.
// Throws std::invalid_argument when the dataset holds no ranked pair.
RankingModel train(const Dataset& dataset, const TrainOptions& options);

double predict(const RankingModel& model, const FeatureVector& features);

// Fraction of pairs (label 1, label 0) scored with the label-1 conflict not
// strictly higher. Throws std::invalid_argument when there are no such pairs.
double swapped_pairs(std::span<const int> labels, std::span<const double> scores);

// Argmax of scores; ties go to a cardinal, then semi-cardinal, then earlier
// (normalized) time step, then lower index.
std::size_t pick_best(std::span<const double> scores, std::span<const FeatureVector> features);

struct Evaluation {
  double swapped_pairs_pct = 0.0;  // over nodes with at least one pair
  double top_pick_pct = 0.0;
  double random_pick_pct = 0.0;  // expected accuracy of a uniform pick
  std::size_t nodes = 0;
  std::size_t ranked_nodes = 0;
};

Evaluation evaluate(const RankingModel& model, const Dataset& dataset);

// (1-based index, weight) by decreasing |weight|, ties by index.
std::vector<std::pair<int, double>> feature_importance(const RankingModel& model);

// `dim 67 C <C> mask <list|none>` then the weights on one line.
void write_model(std::ostream& out, const RankingModel& model);
RankingModel read_model(std::istream& in);
void save_model(const std::string& path, const RankingModel& model);
RankingModel load_model(const std::string& path);

}  // namespace mlcbs
