// mlcbs: command line front end for the solver, data collection, training and benchmarks.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mlcbs/dataset.hpp"
#include "mlcbs/harness.hpp"
#include "mlcbs/oracle.hpp"
#include "mlcbs/ranker.hpp"

using namespace mlcbs;
namespace fs = std::filesystem;

namespace {

struct Common {
  std::uint64_t seed = 0;
  int threads = 1;
  double time_limit = 60.0;
  long long node_limit = 1'000'000;
};

SearchLimits limits_of(const Common& c) {
  SearchLimits l;
  l.time_limit_s = c.time_limit;
  l.node_limit = c.node_limit;
  return l;
}

std::ofstream open_out(const std::string& path) {
  if (const auto parent = fs::path(path).parent_path(); !parent.empty()) fs::create_directories(parent);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  return out;
}

// Writes to `path`, or stdout when empty or "-".
template <typename Fn>
void emit(const std::string& path, Fn&& fn) {
  if (path.empty() || path == "-") {
    fn(std::cout);
    return;
  }
  auto out = open_out(path);
  fn(out);
}

void print_record(std::ostream& out, const std::string& map, const Instance& inst, const std::string& selector,
                  const RunRecord& r) {
  const RunRow row{map, inst.agents(), inst.seed, selector, r};
  write_runs_csv(out, std::span<const RunRow>(&row, 1));
}

Dataset load_all(const std::vector<std::string>& paths) {
  std::vector<Dataset> parts;
  for (const auto& p : paths) {
    parts.push_back(load_dataset(p));
    if (parts.back().duplicate_rows > 0)
      std::cerr << "warning: " << p << " has " << parts.back().duplicate_rows << " duplicate rows\n";
  }
  return parts.size() == 1 ? std::move(parts.front()) : merge(parts);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Conflict-based search with learned conflict selection"};
  app.set_config("--config", "", "Read options from a config file (key = value, [subcommand] sections)");
  app.require_subcommand(1);
  app.fallthrough();

  Common common;
  app.add_option("--seed", common.seed, "Base random seed");
  app.add_option("--threads", common.threads, "Worker threads")->check(CLI::PositiveNumber);
  app.add_option("--time-limit", common.time_limit, "Per-solve time limit in seconds")->check(CLI::PositiveNumber);
  app.add_option("--node-limit", common.node_limit, "Per-solve CT expansion limit")->check(CLI::PositiveNumber);

  std::string map_spec;
  auto add_map = [&](CLI::App* sub, bool required = true) {
    auto* o = sub->add_option("--map", map_spec, "Map file or random:W:H:BLOCKED:SEED");
    if (required) o->required();
  };

  // gen
  auto* gen = app.add_subcommand("gen", "Generate instance files");
  int gen_agents = 10, gen_instances = 25;
  std::string gen_out;
  add_map(gen);
  gen->add_option("--agents", gen_agents)->check(CLI::PositiveNumber);
  gen->add_option("--instances", gen_instances)->check(CLI::PositiveNumber);
  gen->add_option("--out", gen_out, "Output directory")->required();

  // solve
  auto* solve_cmd = app.add_subcommand("solve", "Solve one instance");
  std::string solve_instance, solve_selector = "o0", solve_out;
  int solve_agents = 10;
  add_map(solve_cmd);
  solve_cmd->add_option("--instance", solve_instance, "Instance file (otherwise generated from --agents/--seed)");
  solve_cmd->add_option("--agents", solve_agents)->check(CLI::PositiveNumber);
  solve_cmd->add_option("--selector", solve_selector, "random|o0|o1|o2|model:PATH");
  solve_cmd->add_option("--out", solve_out, "Solution file");

  // collect
  auto* collect_cmd = app.add_subcommand("collect", "Collect a labelled ranking dataset");
  int collect_agents = 8, collect_instances = 30;
  std::string collect_oracle = "o1", collect_out;
  add_map(collect_cmd);
  collect_cmd->add_option("--agents", collect_agents)->check(CLI::PositiveNumber);
  collect_cmd->add_option("--instances", collect_instances)->check(CLI::PositiveNumber);
  collect_cmd->add_option("--oracle", collect_oracle, "o0|o1|o2");
  collect_cmd->add_option("--out", collect_out)->required();

  // sample
  auto* sample_cmd = app.add_subcommand("sample", "Sample CT nodes from a dataset");
  std::vector<std::string> sample_in;
  std::size_t sample_n = 5000;
  std::string sample_out;
  sample_cmd->add_option("--in", sample_in, "Dataset files")->required();
  sample_cmd->add_option("--samples", sample_n)->check(CLI::PositiveNumber);
  sample_cmd->add_option("--out", sample_out)->required();

  // train
  auto* train_cmd = app.add_subcommand("train", "Train a ranking model");
  std::vector<std::string> train_in;
  double train_c = 0.01;
  int train_epochs = 50;
  std::string train_mask, train_out, train_importance;
  train_cmd->add_option("--in", train_in, "Dataset files")->required();
  train_cmd->add_option("--C", train_c)->check(CLI::PositiveNumber);
  train_cmd->add_option("--epochs", train_epochs)->check(CLI::PositiveNumber);
  train_cmd->add_option("--feature-mask", train_mask, "Indices to zero, e.g. cat1, 3-5, keep:1,2");
  train_cmd->add_option("--out", train_out, "Model file")->required();
  train_cmd->add_option("--importance", train_importance, "Write (index, weight) pairs by |weight|");

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a model on a dataset");
  std::string eval_model, eval_out;
  std::vector<std::string> eval_in;
  eval_cmd->add_option("--model", eval_model)->required();
  eval_cmd->add_option("--in", eval_in)->required();
  eval_cmd->add_option("--out", eval_out);

  // bench
  auto* bench_cmd = app.add_subcommand("bench", "Compare selectors on generated instances");
  std::vector<int> bench_agents{10};
  int bench_instances = 25;
  std::vector<std::string> bench_selectors{"random", "o0", "o1", "o2"};
  std::string bench_model, bench_out, bench_report;
  add_map(bench_cmd);
  bench_cmd->add_option("--agents", bench_agents)->delimiter(',');
  bench_cmd->add_option("--instances", bench_instances)->check(CLI::PositiveNumber);
  bench_cmd->add_option("--selector", bench_selectors, "Selectors; `learned` uses --model")->delimiter(',');
  bench_cmd->add_option("--model", bench_model);
  bench_cmd->add_option("--out", bench_out, "Per-run CSV");
  bench_cmd->add_option("--report", bench_report, "Aggregate CSV (default stdout)");

  // pipeline
  auto* pipe_cmd = app.add_subcommand("pipeline", "Collect, sample, train, evaluate and benchmark");
  PipelineConfig pipe;
  std::string pipe_mask, pipe_out;
  add_map(pipe_cmd);
  pipe_cmd->add_option("--train-map", pipe.train_maps, "Training maps (default: --map)");
  pipe_cmd->add_option("--agents", pipe.collect_agents)->check(CLI::PositiveNumber);
  pipe_cmd->add_option("--instances", pipe.train_instances, "Training instances per map")->check(CLI::PositiveNumber);
  pipe_cmd->add_option("--test-instances", pipe.test_instances)->check(CLI::NonNegativeNumber);
  pipe_cmd->add_option("--samples", pipe.samples)->check(CLI::PositiveNumber);
  pipe_cmd->add_option("--C", pipe.C)->check(CLI::PositiveNumber);
  pipe_cmd->add_option("--epochs", pipe.epochs)->check(CLI::PositiveNumber);
  pipe_cmd->add_option("--feature-mask", pipe_mask);
  pipe_cmd->add_option("--bench-agents", pipe.bench_agents)->delimiter(',');
  pipe_cmd->add_option("--bench-instances", pipe.bench_instances)->check(CLI::PositiveNumber);
  pipe_cmd->add_option("--selector", pipe.bench_selectors, "Baseline selectors for the benchmark")->delimiter(',');
  pipe_cmd->add_option("--out", pipe_out, "Output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      const auto map = load_map_spec(map_spec);
      fs::create_directories(gen_out);
      {
        auto out = open_out((fs::path(gen_out) / "map.map").string());
        write_map(out, *map);
      }
      for (const auto& inst : make_instances(map, gen_agents, gen_instances, common.seed)) {
        const auto name = "k" + std::to_string(gen_agents) + "_" + std::to_string(inst.seed) + ".inst";
        auto out = open_out((fs::path(gen_out) / name).string());
        write_instance(out, inst);
      }
    } else if (*solve_cmd) {
      const auto map = load_map_spec(map_spec);
      Instance inst;
      if (!solve_instance.empty()) {
        std::ifstream in(solve_instance);
        if (!in) throw std::runtime_error("cannot read " + solve_instance);
        inst = read_instance(in, map);
      } else {
        inst = generate_instance(map, solve_agents, common.seed);
      }
      auto policy = make_selector(solve_selector, inst.seed);
      Search search(inst, limits_of(common));
      const auto result = search.solve(*policy);
      print_record(std::cout, map->name(), inst, solve_selector, result.record);
      if (result.solution && !solve_out.empty()) emit(solve_out, [&](std::ostream& o) { write_solution(o, *result.solution); });
      return result.record.solved ? 0 : 2;
    } else if (*collect_cmd) {
      const auto map = load_map_spec(map_spec);
      const auto instances = make_instances(map, collect_agents, collect_instances, common.seed);
      CollectOptions opt;
      opt.oracle = parse_label_oracle(collect_oracle);
      opt.limits = limits_of(common);
      opt.seed = common.seed;
      opt.threads = common.threads;
      const Dataset d = collect(instances, opt);
      save_dataset(collect_out, d);
      std::cerr << "collected " << d.samples.size() << " nodes, " << d.rows() << " rows\n";
    } else if (*sample_cmd) {
      const Dataset d = sample_nodes(load_all(sample_in), sample_n, common.seed);
      save_dataset(sample_out, d);
    } else if (*train_cmd) {
      const Dataset d = load_all(train_in);
      TrainOptions opt;
      opt.C = train_c;
      opt.epochs = train_epochs;
      opt.seed = common.seed;
      opt.mask = parse_feature_mask(train_mask);
      const RankingModel m = train(d, opt);
      save_model(train_out, m);
      write_evaluation(std::cout, "train", evaluate(m, d));
      if (!train_importance.empty())
        emit(train_importance, [&](std::ostream& o) {
          for (const auto& [i, w] : feature_importance(m)) o << i << ' ' << format_double(w) << '\n';
        });
    } else if (*eval_cmd) {
      const RankingModel m = load_model(eval_model);
      const Dataset d = load_all(eval_in);
      emit(eval_out, [&](std::ostream& o) { write_evaluation(o, "eval", evaluate(m, d)); });
    } else if (*bench_cmd) {
      ExperimentConfig c;
      c.map = map_spec;
      c.agents = bench_agents;
      c.instances = bench_instances;
      c.time_limit_s = common.time_limit;
      c.node_limit = common.node_limit;
      c.selectors = bench_selectors;
      c.seed = common.seed;
      c.threads = common.threads;
      if (!bench_model.empty()) c.learned_model = load_model(bench_model);
      const auto r = run_experiment(c);
      if (!bench_out.empty()) emit(bench_out, [&](std::ostream& o) { write_runs_csv(o, r.runs); });
      emit(bench_report, [&](std::ostream& o) { write_report_csv(o, r.report); });
    } else if (*pipe_cmd) {
      pipe.test_map = map_spec;
      if (pipe.train_maps.empty()) pipe.train_maps = {map_spec};
      pipe.mask = parse_feature_mask(pipe_mask);
      pipe.time_limit_s = common.time_limit;
      pipe.node_limit = common.node_limit;
      pipe.seed = common.seed;
      pipe.threads = common.threads;
      const auto r = run_pipeline(pipe);
      const fs::path dir(pipe_out);
      fs::create_directories(dir);
      save_model((dir / "model.txt").string(), r.model);
      save_dataset((dir / "train.txt").string(), r.train);
      save_dataset((dir / "test.txt").string(), r.test);
      {
        auto out = open_out((dir / "evaluation.txt").string());
        write_evaluation(out, "train", r.train_eval);
        write_evaluation(out, "test", r.test_eval);
      }
      write_evaluation(std::cout, "train", r.train_eval);
      write_evaluation(std::cout, "test", r.test_eval);
      if (r.bench) {
        auto runs = open_out((dir / "runs.csv").string());
        write_runs_csv(runs, r.bench->runs);
        auto rep = open_out((dir / "report.csv").string());
        write_report_csv(rep, r.bench->report);
        write_report_csv(std::cout, r.bench->report);
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
