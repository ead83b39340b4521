#include "mlcbs/harness.hpp"

#include <algorithm>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include "mlcbs/oracle.hpp"
#include "mlcbs/parallel.hpp"
#include "mlcbs/random.hpp"

namespace mlcbs {

double par10(std::span<const std::optional<double>> runtimes, double limit) {
  if (runtimes.empty()) throw std::invalid_argument("par10 of no runs");
  if (!(limit > 0.0)) throw std::invalid_argument("time limit must be positive");
  double sum = 0.0;
  for (const auto& r : runtimes) sum += r ? *r : 10.0 * limit;
  return sum / static_cast<double>(runtimes.size());
}

std::shared_ptr<const GridMap> load_map_spec(const std::string& spec) {
  if (spec.rfind("random:", 0) == 0) {
    std::vector<std::string> parts;
    std::stringstream ss(spec.substr(7));
    std::string item;
    while (std::getline(ss, item, ':')) parts.push_back(item);
    if (parts.size() != 4) throw std::invalid_argument("random map spec is random:W:H:BLOCKED:SEED, got " + spec);
    try {
      return std::make_shared<const GridMap>(
          random_map(std::stoi(parts[0]), std::stoi(parts[1]), std::stoi(parts[2]), std::stoull(parts[3])));
    } catch (const std::logic_error&) {
      throw std::invalid_argument("bad random map spec " + spec);
    }
  }
  return std::make_shared<const GridMap>(load_map(spec));
}

std::uint64_t instance_seed(std::uint64_t base, int agents, int index) {
  return hash_combine(hash_combine(base, static_cast<std::uint64_t>(agents)), static_cast<std::uint64_t>(index));
}

std::vector<Instance> make_instances(const std::shared_ptr<const GridMap>& map, int agents, int count,
                                     std::uint64_t base_seed) {
  std::vector<Instance> out;
  for (int i = 0; i < count; ++i) out.push_back(generate_instance(map, agents, instance_seed(base_seed, agents, i)));
  return out;
}

namespace {

std::unique_ptr<SelectionPolicy> selector_for(const std::string& spec, std::uint64_t seed,
                                              const ExperimentConfig& config) {
  if (spec == "learned") {
    if (!config.learned_model) throw std::invalid_argument("selector `learned` needs a model");
    return std::make_unique<LearnedSelector>(*config.learned_model, seed);
  }
  return make_selector(spec, seed);
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& config) {
  if (config.instances < 1) throw std::invalid_argument("instance count must be positive");
  const auto map = load_map_spec(config.map);
  std::vector<Instance> instances;
  for (int k : config.agents) {
    if (k < 1) throw std::invalid_argument("agent count must be positive");
    auto batch = make_instances(map, k, config.instances, config.seed);
    instances.insert(instances.end(), batch.begin(), batch.end());
  }
  return run_experiment(instances, config);
}

ExperimentResult run_experiment(std::span<const Instance> instances, const ExperimentConfig& config) {
  if (!(config.time_limit_s > 0.0)) throw std::invalid_argument("time limit must be positive");
  if (config.selectors.empty()) throw std::invalid_argument("no selectors");
  // fail fast on bad specs
  for (const auto& s : config.selectors) selector_for(s, 0, config);

  const std::size_t per = config.selectors.size();
  std::vector<RunRow> runs(instances.size() * per);
  SearchLimits limits;
  limits.time_limit_s = config.time_limit_s;
  limits.node_limit = config.node_limit;
  parallel_for(runs.size(), config.threads, [&](std::size_t job) {
    const Instance& instance = instances[job / per];
    const std::string& spec = config.selectors[job % per];
    auto policy = selector_for(spec, instance.seed, config);
    Search search(instance, limits);
    const auto result = search.solve(*policy);
    runs[job] = {instance.map->name(), instance.agents(), instance.seed, spec, result.record};
  });
  ExperimentResult out;
  out.report = aggregate(runs, config.time_limit_s);
  out.runs = std::move(runs);
  return out;
}

std::vector<ReportRow> aggregate(std::span<const RunRow> runs, double time_limit_s) {
  // key: (map, k)
  std::map<std::pair<std::string, int>, std::vector<const RunRow*>> groups;
  std::vector<std::pair<std::string, int>> group_order;
  for (const auto& r : runs) {
    const auto key = std::make_pair(r.map, r.agents);
    if (!groups.count(key)) group_order.push_back(key);
    groups[key].push_back(&r);
  }
  std::vector<ReportRow> out;
  for (const auto& key : group_order) {
    const auto& rows = groups[key];
    std::vector<std::string> selectors;
    for (const auto* r : rows)
      if (std::find(selectors.begin(), selectors.end(), r->selector) == selectors.end())
        selectors.push_back(r->selector);
    std::map<std::uint64_t, std::set<std::string>> solved_by;
    std::set<std::uint64_t> seeds;
    for (const auto* r : rows) {
      seeds.insert(r->instance_seed);
      if (r->record.solved) solved_by[r->instance_seed].insert(r->selector);
    }
    std::set<std::uint64_t> common;
    for (auto s : seeds)
      if (solved_by[s].size() == selectors.size()) common.insert(s);

    for (const auto& sel : selectors) {
      ReportRow row;
      row.map = key.first;
      row.agents = key.second;
      row.selector = sel;
      std::vector<std::optional<double>> times;
      int solved = 0;
      double rt = 0.0, ct = 0.0;
      for (const auto* r : rows) {
        if (r->selector != sel) continue;
        ++row.instances;
        times.push_back(r->record.solved ? std::optional<double>(r->record.runtime_s) : std::nullopt);
        if (r->record.solved) ++solved;
        if (common.count(r->instance_seed)) {
          ++row.commonly_solved;
          rt += r->record.runtime_s;
          ct += static_cast<double>(r->record.ct_expanded);
        }
      }
      row.success_rate = 100.0 * solved / row.instances;
      if (row.commonly_solved > 0) {
        row.mean_runtime_s = rt / row.commonly_solved;
        row.mean_ct_size = ct / row.commonly_solved;
      }
      row.par10_s = par10(times, time_limit_s);
      out.push_back(row);
    }
  }
  return out;
}

void write_runs_csv(std::ostream& out, std::span<const RunRow> runs) {
  out << "map,k,instance_seed,selector,solved,cost,runtime_s,oracle_time_s,ct_expanded,ct_generated\n";
  for (const auto& r : runs) {
    out << r.map << ',' << r.agents << ',' << r.instance_seed << ',' << r.selector << ','
        << (r.record.solved ? 1 : 0) << ',' << (r.record.cost ? std::to_string(*r.record.cost) : std::string())
        << ',' << format_double(r.record.runtime_s) << ',' << format_double(r.record.oracle_time_s) << ','
        << r.record.ct_expanded << ',' << r.record.ct_generated << '\n';
  }
}

void write_report_csv(std::ostream& out, std::span<const ReportRow> rows) {
  out << "map,k,selector,success_rate,mean_runtime_s,mean_ct_size,par10_s,commonly_solved,instances\n";
  for (const auto& r : rows) {
    out << r.map << ',' << r.agents << ',' << r.selector << ',' << format_double(r.success_rate) << ','
        << format_double(r.mean_runtime_s) << ',' << format_double(r.mean_ct_size) << ','
        << format_double(r.par10_s) << ',' << r.commonly_solved << ',' << r.instances << '\n';
  }
}

PipelineResult run_pipeline(const PipelineConfig& config) {
  if (config.train_maps.empty()) throw std::invalid_argument("no training maps");
  if (config.samples == 0) throw std::invalid_argument("sample count must be positive");
  PipelineResult result;
  CollectOptions collect_options;
  collect_options.oracle = LabelOracle::o1;
  collect_options.limits.time_limit_s = config.time_limit_s;
  collect_options.limits.node_limit = config.node_limit;
  collect_options.seed = config.seed;
  collect_options.threads = config.threads;

  const std::size_t per_map = std::max<std::size_t>(1, config.samples / config.train_maps.size());
  std::vector<Dataset> parts;
  for (std::size_t m = 0; m < config.train_maps.size(); ++m) {
    const auto map = load_map_spec(config.train_maps[m]);
    const auto instances =
        make_instances(map, config.collect_agents, config.train_instances, hash_combine(config.seed, m + 1));
    const Dataset full = collect(instances, collect_options);
    parts.push_back(sample_nodes(full, per_map, hash_combine(config.seed, 0x5a3b1e + m)));
  }
  result.train = merge(parts);

  const auto test_map = load_map_spec(config.test_map);
  if (config.test_instances > 0) {
    const auto held_out =
        make_instances(test_map, config.collect_agents, config.test_instances, hash_combine(config.seed, 0x7e57));
    result.test = collect(held_out, collect_options);
  }

  TrainOptions train_options;
  train_options.C = config.C;
  train_options.mask = config.mask;
  train_options.epochs = config.epochs;
  train_options.seed = config.seed;
  result.model = train(result.train, train_options);
  result.train_eval = evaluate(result.model, result.train);
  result.test_eval = evaluate(result.model, result.test);

  if (!config.bench_agents.empty()) {
    ExperimentConfig bench;
    bench.agents = config.bench_agents;
    bench.instances = config.bench_instances;
    bench.time_limit_s = config.time_limit_s;
    bench.node_limit = config.node_limit;
    bench.selectors = config.bench_selectors;
    if (std::find(bench.selectors.begin(), bench.selectors.end(), "learned") == bench.selectors.end())
      bench.selectors.push_back("learned");
    bench.seed = hash_combine(config.seed, 0xbe7c);
    bench.threads = config.threads;
    bench.learned_model = result.model;
    std::vector<Instance> instances;
    for (int k : bench.agents) {
      auto batch = make_instances(test_map, k, bench.instances, bench.seed);
      instances.insert(instances.end(), batch.begin(), batch.end());
    }
    result.bench = run_experiment(instances, bench);
  }
  return result;
}

void write_evaluation(std::ostream& out, const std::string& label, const Evaluation& ev) {
  out << label << ": nodes=" << ev.nodes << " ranked_nodes=" << ev.ranked_nodes
      << " swapped_pairs_pct=" << format_double(ev.swapped_pairs_pct)
      << " top_pick_pct=" << format_double(ev.top_pick_pct)
      << " random_pick_pct=" << format_double(ev.random_pick_pct) << '\n';
}

}  // namespace mlcbs
