#include "mlcbs/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

#include "mlcbs/oracle.hpp"
#include "mlcbs/parallel.hpp"
#include "mlcbs/random.hpp"

namespace mlcbs {

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& text) {
  double v = 0.0;
  const char* b = text.data();
  const char* e = b + text.size();
  if (b != e && *b == '+') ++b;
  const auto res = std::from_chars(b, e, v);
  if (res.ec != std::errc() || res.ptr != e) throw DatasetFormatError("not a number: " + text);
  return v;
}

std::size_t Dataset::rows() const {
  std::size_t n = 0;
  for (const auto& s : samples) n += s.size();
  return n;
}

std::vector<int> label_from_scores(std::span<const double> scores) {
  std::vector<int> labels(scores.size(), 0);
  if (scores.empty()) return labels;
  std::vector<double> sorted(scores.begin(), scores.end());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  const std::size_t q = scores.size() / 5;
  const double threshold = sorted[q];
  bool any = false;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (scores[i] > threshold) {
      labels[i] = 1;
      any = true;
    }
  }
  if (!any)
    for (std::size_t i = 0; i < scores.size(); ++i) labels[i] = scores[i] == sorted.front() ? 1 : 0;
  return labels;
}

LabelOracle parse_label_oracle(const std::string& name) {
  if (name == "o0") return LabelOracle::o0;
  if (name == "o1") return LabelOracle::o1;
  if (name == "o2") return LabelOracle::o2;
  throw std::invalid_argument("labeling oracle must be o0, o1 or o2: " + name);
}

const char* to_string(LabelOracle oracle) {
  switch (oracle) {
    case LabelOracle::o0: return "o0";
    case LabelOracle::o1: return "o1";
    case LabelOracle::o2: return "o2";
  }
  return "?";
}

Dataset collect(std::span<const Instance> instances, const CollectOptions& options) {
  std::vector<std::vector<NodeSample>> per_instance(instances.size());
  parallel_for(instances.size(), options.threads, [&](std::size_t i) {
    const Instance& instance = instances[i];
    Search search(instance, options.limits);
    const std::uint64_t seed = hash_combine(options.seed, instance.seed);
    std::unique_ptr<SelectionPolicy> policy;
    switch (options.oracle) {
      case LabelOracle::o0: policy = std::make_unique<O0Selector>(seed); break;
      case LabelOracle::o1: policy = std::make_unique<LookaheadSelector>(LookaheadSelector::Mode::o1, seed); break;
      case LabelOracle::o2: policy = std::make_unique<LookaheadSelector>(LookaheadSelector::Mode::o2, seed); break;
    }
    auto& out = per_instance[i];
    search.solve(*policy, [&](Search& s, const CTNode& node, const Selection& selection) {
      if (node.conflicts.empty() || s.out_of_time()) return;
      NodeSample sample;
      sample.features = node_features(s, node);
      sample.scores = selection.scores;
      if (options.oracle == LabelOracle::o2)
        for (auto& v : sample.scores) v = -v;
      sample.labels = label_from_scores(sample.scores);
      out.push_back(std::move(sample));
    });
  });

  Dataset dataset;
  std::uint64_t qid = 0;
  for (std::size_t i = 0; i < instances.size(); ++i) {
    dataset.provenance.push_back(
        {instances[i].map->name(), instances[i].agents(), to_string(options.oracle), instances[i].seed});
    for (auto& s : per_instance[i]) {
      s.qid = qid++;
      dataset.samples.push_back(std::move(s));
    }
  }
  return dataset;
}

Dataset sample_nodes(const Dataset& dataset, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw std::invalid_argument("sample size must be positive");
  Dataset out;
  out.provenance = dataset.provenance;
  if (n >= dataset.samples.size()) {
    out.samples = dataset.samples;
    return out;
  }
  Rng rng(seed);
  std::vector<std::size_t> reservoir(n);
  for (std::size_t i = 0; i < dataset.samples.size(); ++i) {
    if (i < n) {
      reservoir[i] = i;
    } else {
      const auto j = static_cast<std::size_t>(rng.index(i + 1));
      if (j < n) reservoir[j] = i;
    }
  }
  std::sort(reservoir.begin(), reservoir.end());
  for (std::size_t i : reservoir) out.samples.push_back(dataset.samples[i]);
  return out;
}

Dataset merge(std::span<const Dataset> parts) {
  Dataset out;
  std::uint64_t qid = 0;
  for (const auto& part : parts) {
    out.provenance.insert(out.provenance.end(), part.provenance.begin(), part.provenance.end());
    for (auto s : part.samples) {
      s.qid = qid++;
      out.samples.push_back(std::move(s));
    }
  }
  return out;
}

void write_dataset(std::ostream& out, const Dataset& dataset) {
  out << "# mlcbs ranking dataset, dim=" << kFeatureCount << '\n';
  for (const auto& p : dataset.provenance)
    out << "# map=" << p.map << " k=" << p.agents << " oracle=" << p.oracle << " seed=" << p.seed << '\n';
  for (const auto& s : dataset.samples) {
    for (std::size_t i = 0; i < s.size(); ++i) {
      out << s.labels[i] << " qid:" << s.qid;
      for (std::size_t k = 0; k < kFeatureCount; ++k)
        if (s.features[i][k] != 0.0) out << ' ' << (k + 1) << ':' << format_double(s.features[i][k]);
      out << " # score=" << format_double(s.scores[i]) << '\n';
    }
  }
}

namespace {

Provenance parse_provenance(const std::string& body) {
  Provenance p;
  std::istringstream ss(body);
  std::string tok;
  while (ss >> tok) {
    const auto eq = tok.find('=');
    if (eq == std::string::npos) continue;
    const std::string key = tok.substr(0, eq), value = tok.substr(eq + 1);
    if (key == "map") p.map = value;
    else if (key == "k") p.agents = std::stoi(value);
    else if (key == "oracle") p.oracle = value;
    else if (key == "seed") p.seed = std::stoull(value);
  }
  return p;
}

}  // namespace

Dataset read_dataset(std::istream& in) {
  Dataset dataset;
  std::map<std::uint64_t, std::size_t> index;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    if (line[first] == '#') {
      const std::string body = line.substr(first + 1);
      if (body.find("map=") != std::string::npos) dataset.provenance.push_back(parse_provenance(body));
      continue;
    }
    auto fail = [&](const std::string& why) {
      throw DatasetFormatError("line " + std::to_string(line_no) + ": " + why);
    };
    std::string data = line, comment;
    if (const auto hash = line.find('#'); hash != std::string::npos) {
      data = line.substr(0, hash);
      comment = line.substr(hash + 1);
    }
    std::istringstream ss(data);
    std::string tok;
    if (!(ss >> tok)) fail("missing label");
    int label = 0;
    if (tok == "1" || tok == "+1") label = 1;
    else if (tok == "0" || tok == "-1") label = 0;
    else fail("label must be 0 or 1");
    if (!(ss >> tok) || tok.rfind("qid:", 0) != 0) fail("missing qid");
    std::uint64_t qid = 0;
    try {
      qid = std::stoull(tok.substr(4));
    } catch (const std::exception&) {
      fail("bad qid");
    }
    FeatureVector f{};
    int last = 0;
    while (ss >> tok) {
      const auto colon = tok.find(':');
      if (colon == std::string::npos) fail("bad feature entry " + tok);
      int idx = 0;
      try {
        idx = std::stoi(tok.substr(0, colon));
      } catch (const std::exception&) {
        fail("bad feature index " + tok);
      }
      if (idx < 1 || idx > static_cast<int>(kFeatureCount)) fail("feature index out of range " + tok);
      if (idx <= last) fail("feature indices must increase");
      last = idx;
      try {
        f[static_cast<std::size_t>(idx - 1)] = parse_double(tok.substr(colon + 1));
      } catch (const DatasetFormatError&) {
        fail("bad feature value " + tok);
      }
    }
    double score = label;
    if (const auto pos = comment.find("score="); pos != std::string::npos) {
      std::istringstream cs(comment.substr(pos + 6));
      std::string value;
      cs >> value;
      try {
        score = parse_double(value);
      } catch (const DatasetFormatError&) {
        fail("bad score");
      }
    }

    auto [it, fresh] = index.emplace(qid, dataset.samples.size());
    if (fresh) {
      dataset.samples.push_back({});
      dataset.samples.back().qid = qid;
    }
    NodeSample& s = dataset.samples[it->second];
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (s.features[i] == f && s.labels[i] == label && s.scores[i] == score) {
        ++dataset.duplicate_rows;
        break;
      }
    }
    s.features.push_back(f);
    s.scores.push_back(score);
    s.labels.push_back(label);
  }
  return dataset;
}

void save_dataset(const std::string& path, const Dataset& dataset) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  write_dataset(out, dataset);
}

Dataset load_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  return read_dataset(in);
}

}  // namespace mlcbs
