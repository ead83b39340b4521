#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "mlcbs/cbs.hpp"
#include "mlcbs/features.hpp"

namespace mlcbs {

class DatasetFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// One CT node. Scores are oriented so that larger is better.
struct NodeSample {
  std::uint64_t qid = 0;
  std::vector<FeatureVector> features;
  std::vector<double> scores;
  std::vector<int> labels;

  std::size_t size() const { return features.size(); }
  bool operator==(const NodeSample&) const = default;
};

struct Provenance {
  std::string map;
  int agents = 0;
  std::string oracle;
  std::uint64_t seed = 0;
  bool operator==(const Provenance&) const = default;
};

struct Dataset {
  std::vector<NodeSample> samples;
  std::vector<Provenance> provenance;
  // Rows identical to an earlier row of the same query (set by read_dataset).
  std::size_t duplicate_rows = 0;

  std::size_t rows() const;
};

// 1 for scores strictly above the (floor(0.2 m) + 1)-th highest; if none, 1 for
// every maximal score.
std::vector<int> label_from_scores(std::span<const double> scores);

enum class LabelOracle { o0, o1, o2 };

LabelOracle parse_label_oracle(const std::string& name);
const char* to_string(LabelOracle oracle);

struct CollectOptions {
  LabelOracle oracle = LabelOracle::o1;
  SearchLimits limits;
  std::uint64_t seed = 0;
  int threads = 1;
};

// Runs the search guided by the oracle and records every expanded node that has
// conflicts; query ids follow (instance index, expansion order).
Dataset collect(std::span<const Instance> instances, const CollectOptions& options);

// Uniform sample of n nodes without replacement (all of them when fewer exist).
Dataset sample_nodes(const Dataset& dataset, std::size_t n, std::uint64_t seed);

// Concatenation with query ids renumbered from 0.
Dataset merge(std::span<const Dataset> parts);

// svmlight lines `<label> qid:<id> i:v ... # score=<s>`, zero entries omitted.
void write_dataset(std::ostream& out, const Dataset& dataset);
Dataset read_dataset(std::istream& in);
void save_dataset(const std::string& path, const Dataset& dataset);
Dataset load_dataset(const std::string& path);

// Shortest decimal text that parses back to the same double.
std::string format_double(double value);
double parse_double(const std::string& text);

}  // namespace mlcbs
