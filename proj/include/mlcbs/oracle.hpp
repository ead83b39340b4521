#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mlcbs/cbs.hpp"
#include "mlcbs/random.hpp"
#include "mlcbs/ranker.hpp"

namespace mlcbs {

struct ScoredConflicts {
  std::vector<double> scores;
  std::vector<std::size_t> ranking;  // best first
  std::vector<std::array<ChildSummary, 2>> children;  // filled by lookahead oracles
};

// Deterministic per-conflict tie value.
std::uint64_t tie_key(const Conflict& conflict, std::uint64_t seed);

// Cardinal before semi-cardinal before non-cardinal, then earlier, then tie_key.
bool o0_before(const Conflict& a, const Conflict& b, std::uint64_t seed);

ScoredConflicts rank_o0(const CTNode& node, std::uint64_t seed);

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

// min(g + h) over the feasible children; -inf when both are infeasible.
double o1_value(const std::optional<CTNode>& left, const std::optional<CTNode>& right);
// min conflict count over the feasible children; +inf when both are infeasible.
double o2_value(const std::optional<CTNode>& left, const std::optional<CTNode>& right);

struct Lookahead {
  std::optional<CTNode> left;
  std::optional<CTNode> right;
};

// Builds both children of every conflict. Ranking: O1 descending, O2 ascending,
// ties by the O0 order. `kept` receives the children when non-null.
ScoredConflicts score_o1(Search& search, const CTNode& node, std::uint64_t seed,
                         std::vector<Lookahead>* kept = nullptr);
ScoredConflicts score_o2(Search& search, const CTNode& node, std::uint64_t seed,
                         std::vector<Lookahead>* kept = nullptr);

class RandomSelector : public SelectionPolicy {
 public:
  explicit RandomSelector(std::uint64_t seed) : rng_(seed) {}
  Selection select(Search& search, const CTNode& node) override;
  std::string name() const override { return "random"; }

 private:
  Rng rng_;
};

class O0Selector : public SelectionPolicy {
 public:
  explicit O0Selector(std::uint64_t seed) : seed_(seed) {}
  Selection select(Search& search, const CTNode& node) override;
  std::string name() const override { return "o0"; }

 private:
  std::uint64_t seed_;
};

class LookaheadSelector : public SelectionPolicy {
 public:
  enum class Mode { o1, o2 };
  LookaheadSelector(Mode mode, std::uint64_t seed) : mode_(mode), seed_(seed) {}
  Selection select(Search& search, const CTNode& node) override;
  std::string name() const override { return mode_ == Mode::o1 ? "o1" : "o2"; }

 private:
  Mode mode_;
  std::uint64_t seed_;
};

class LearnedSelector : public SelectionPolicy {
 public:
  LearnedSelector(RankingModel model, std::uint64_t seed, std::string label = "learned")
      : model_(std::move(model)), seed_(seed), label_(std::move(label)) {}
  Selection select(Search& search, const CTNode& node) override;
  std::string name() const override { return label_; }

 private:
  RankingModel model_;
  std::uint64_t seed_;
  std::string label_;
};

// `random`, `o0`, `o1`, `o2` or `model:PATH`.
std::unique_ptr<SelectionPolicy> make_selector(const std::string& spec, std::uint64_t seed);

}  // namespace mlcbs
