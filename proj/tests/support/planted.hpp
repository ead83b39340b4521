#pragma once

// Ranking data generated from a known linear model.

#include <algorithm>
#include <cstdint>

#include "mlcbs/dataset.hpp"
#include "mlcbs/random.hpp"

namespace planted {

inline mlcbs::FeatureVector model(std::uint64_t seed, std::size_t dims = mlcbs::kFeatureCount) {
  mlcbs::Rng rng(seed);
  mlcbs::FeatureVector w{};
  for (std::size_t k = 0; k < dims; ++k) w[k] = rng.normal();
  return w;
}

// Queries of 2..8 conflicts with features in [0, 1] over the first `dims`
// coordinates; labels from the planted scores, kept only when every
// (label 1, label 0) pair is separated by at least `margin`.
inline mlcbs::Dataset generate(const mlcbs::FeatureVector& w, std::size_t queries, double margin, std::uint64_t seed,
                               std::size_t dims = mlcbs::kFeatureCount) {
  mlcbs::Rng rng(seed);
  mlcbs::Dataset d;
  d.provenance.push_back({"planted", 0, "linear", seed});
  while (d.samples.size() < queries) {
    mlcbs::NodeSample s;
    s.qid = d.samples.size();
    const std::size_t m = 2 + rng.index(7);
    for (std::size_t i = 0; i < m; ++i) {
      mlcbs::FeatureVector f{};
      for (std::size_t k = 0; k < dims; ++k) f[k] = rng.uniform();
      double score = 0.0;
      for (std::size_t k = 0; k < dims; ++k) score += w[k] * f[k];
      s.features.push_back(f);
      s.scores.push_back(score);
    }
    s.labels = mlcbs::label_from_scores(s.scores);
    double lo1 = 1e300, hi0 = -1e300;
    for (std::size_t i = 0; i < m; ++i) {
      if (s.labels[i] == 1) lo1 = std::min(lo1, s.scores[i]);
      else hi0 = std::max(hi0, s.scores[i]);
    }
    if (hi0 > -1e300 && lo1 - hi0 < margin) continue;
    d.samples.push_back(std::move(s));
  }
  return d;
}

}  // namespace planted
