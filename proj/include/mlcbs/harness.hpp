#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mlcbs/cbs.hpp"
#include "mlcbs/dataset.hpp"
#include "mlcbs/ranker.hpp"

namespace mlcbs {

// Mean of runtimes with unsolved runs (nullopt) counted as 10 * limit.
double par10(std::span<const std::optional<double>> runtimes, double limit);

// A map file path, or `random:W:H:BLOCKED:SEED` for a generated map.
std::shared_ptr<const GridMap> load_map_spec(const std::string& spec);

// Seed of the i-th instance with k agents in a sweep.
std::uint64_t instance_seed(std::uint64_t base, int agents, int index);
std::vector<Instance> make_instances(const std::shared_ptr<const GridMap>& map, int agents, int count,
                                     std::uint64_t base_seed);

struct RunRow {
  std::string map;
  int agents = 0;
  std::uint64_t instance_seed = 0;
  std::string selector;
  RunRecord record;
};

struct ReportRow {
  std::string map;
  int agents = 0;
  std::string selector;
  double success_rate = 0.0;  // percent
  double mean_runtime_s = 0.0;  // over instances every selector solved
  double mean_ct_size = 0.0;  // expanded nodes, same instances
  double par10_s = 0.0;
  int commonly_solved = 0;
  int instances = 0;
};

struct ExperimentConfig {
  std::string map;  // path or random:W:H:BLOCKED:SEED
  std::vector<int> agents{10};
  int instances = 25;
  double time_limit_s = 60.0;
  long long node_limit = 1'000'000;
  std::vector<std::string> selectors{"random", "o0", "o1", "o2"};
  std::uint64_t seed = 0;
  int threads = 1;
  // Used by the selector name `learned`.
  std::optional<RankingModel> learned_model;
};

struct ExperimentResult {
  std::vector<RunRow> runs;
  std::vector<ReportRow> report;
};

ExperimentResult run_experiment(const ExperimentConfig& config);
// Same sweep over explicit instances (grouped by agent count).
ExperimentResult run_experiment(std::span<const Instance> instances, const ExperimentConfig& config);

std::vector<ReportRow> aggregate(std::span<const RunRow> runs, double time_limit_s);

void write_runs_csv(std::ostream& out, std::span<const RunRow> runs);
void write_report_csv(std::ostream& out, std::span<const ReportRow> rows);

struct PipelineConfig {
  std::vector<std::string> train_maps;  // includes test_map for same-map training
  std::string test_map;
  int collect_agents = 8;
  int train_instances = 30;
  int test_instances = 10;
  std::size_t samples = 5000;  // split evenly across train_maps
  double C = 0.01;
  FeatureMask mask;
  int epochs = 50;
  double time_limit_s = 60.0;
  long long node_limit = 1'000'000;
  std::uint64_t seed = 0;
  int threads = 1;
  // Optional solver comparison on the test map; empty skips it.
  std::vector<int> bench_agents;
  int bench_instances = 25;
  std::vector<std::string> bench_selectors{"random", "o0"};
};

struct PipelineResult {
  RankingModel model;
  Dataset train;
  Dataset test;
  Evaluation train_eval;
  Evaluation test_eval;
  std::optional<ExperimentResult> bench;
};

PipelineResult run_pipeline(const PipelineConfig& config);

void write_evaluation(std::ostream& out, const std::string& label, const Evaluation& ev);

}  // namespace mlcbs
