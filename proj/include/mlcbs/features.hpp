#pragma once

#include <array>
#include <bitset>
#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "mlcbs/cbs.hpp"

namespace mlcbs {

inline constexpr std::size_t kFeatureCount = 67;

// Slot i - 1 holds feature i.
using FeatureVector = std::array<double, kFeatureCount>;

// Bit i - 1 set means feature i is zeroed.
using FeatureMask = std::bitset<kFeatureCount>;

using TimedVertex = std::pair<Vertex, int>;

// Capped BFS over the time-expanded grid with links (v, t) -- (w, t + 1) for
// w in N(v) + {v}, traversed in both directions, t >= 0.
class TimeExpandedBall {
 public:
  TimeExpandedBall(const GridMap& map, std::span<const TimedVertex> sources, int cap = 5);
  // Distance, or cap + 1 when beyond the cap.
  int distance(Vertex v, int t) const;
  int cap() const { return cap_; }

 private:
  std::unordered_map<std::uint64_t, int> dist_;
  int cap_;
};

// min distance between the two sets, or cap + 1 when above the cap.
int time_expanded_distance(const GridMap& map, std::span<const TimedVertex> sources,
                           std::span<const TimedVertex> targets, int cap = 5);

// Everything featurization needs about one node, computed once.
class FeatureContext {
 public:
  FeatureContext(Search& search, const CTNode& node);

  const CTNode& node() const { return node_; }
  Search& search() const { return search_; }

  FeatureVector extract_raw(std::size_t conflict_index);

 private:
  Search& search_;
  const CTNode& node_;
  std::vector<int> conflicts_per_agent_;
  std::vector<std::vector<Vertex>> conflict_vertices_;
};

std::vector<FeatureVector> extract_raw_all(Search& search, const CTNode& node);

// Per-feature min-max scaling across the node's conflicts; constant features -> 0.
std::vector<FeatureVector> normalize(std::vector<FeatureVector> raw);

// extract_raw_all followed by normalize.
std::vector<FeatureVector> node_features(Search& search, const CTNode& node);

// Feature categories for ablations.
FeatureMask category_mask(int category);
// Comma-separated items: indices, ranges `A-B`, `cat1`..`cat5`, `cat5n` ({62, 67}).
// `none` or empty masks nothing; a `keep:` prefix masks everything not listed.
FeatureMask parse_feature_mask(const std::string& spec);
// Comma list of masked indices, or `none`.
std::string format_feature_mask(const FeatureMask& mask);

}  // namespace mlcbs
