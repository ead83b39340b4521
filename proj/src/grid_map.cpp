#include "mlcbs/grid_map.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include "mlcbs/random.hpp"

namespace mlcbs {

GridMap::GridMap(int width, int height, std::vector<bool> blocked_cells, std::string name)
    : width_(width), height_(height), blocked_(std::move(blocked_cells)), name_(std::move(name)) {
  if (width <= 0 || height <= 0) throw MapFormatError("map dimensions must be positive");
  if (blocked_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
    throw MapFormatError("blocked mask size does not match dimensions");
  }
  offsets_.reserve(static_cast<std::size_t>(size()) + 1);
  offsets_.push_back(0);
  for (Vertex v = 0; v < size(); ++v) {
    if (!blocked(v)) {
      ++passable_count_;
      const int r = row(v);
      const int c = col(v);
      // ascending index order: up, left, right, down
      if (r > 0 && !blocked(v - width_)) adjacency_.push_back(v - width_);
      if (c > 0 && !blocked(v - 1)) adjacency_.push_back(v - 1);
      if (c + 1 < width_ && !blocked(v + 1)) adjacency_.push_back(v + 1);
      if (r + 1 < height_ && !blocked(v + width_)) adjacency_.push_back(v + width_);
    }
    offsets_.push_back(adjacency_.size());
  }
}

bool GridMap::adjacent(Vertex u, Vertex v) const {
  if (!passable(u) || !passable(v)) return false;
  const auto n = neighbors(u);
  return std::find(n.begin(), n.end(), v) != n.end();
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

int header_value(std::istream& in, const std::string& key) {
  std::string line;
  if (!std::getline(in, line)) throw MapFormatError("missing '" + key + "' header line");
  std::istringstream ls(trim(line));
  std::string word;
  long long value = 0;
  if (!(ls >> word) || word != key || !(ls >> value) || value <= 0) {
    throw MapFormatError("malformed header line, expected '" + key + " <positive int>': " + line);
  }
  return static_cast<int>(value);
}

}  // namespace

GridMap parse_map(std::istream& in, std::string name) {
  std::string line;
  if (!std::getline(in, line)) throw MapFormatError("empty map stream");
  {
    std::istringstream ls(trim(line));
    std::string word;
    std::string type;
    if (!(ls >> word >> type) || word != "type") throw MapFormatError("expected 'type <name>' header");
  }
  const int height = header_value(in, "height");
  const int width = header_value(in, "width");
  if (!std::getline(in, line) || trim(line) != "map") throw MapFormatError("expected 'map' line");

  std::vector<bool> blocked;
  blocked.reserve(static_cast<std::size_t>(width) * static_cast<std::size_t>(height));
  for (int r = 0; r < height; ++r) {
    if (!std::getline(in, line)) {
      throw MapFormatError("expected " + std::to_string(height) + " rows, got " + std::to_string(r));
    }
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (static_cast<int>(line.size()) != width) {
      throw MapFormatError("row " + std::to_string(r) + " has width " + std::to_string(line.size()) +
                           ", expected " + std::to_string(width));
    }
    for (char ch : line) {
      switch (ch) {
        case '.':
        case 'G':
          blocked.push_back(false);
          break;
        case '@':
        case 'O':
        case 'T':
          blocked.push_back(true);
          break;
        default:
          throw MapFormatError(std::string("unknown cell character '") + ch + "' in row " + std::to_string(r));
      }
    }
  }
  while (std::getline(in, line)) {
    if (!trim(line).empty()) throw MapFormatError("extra rows after map body");
  }
  return GridMap(width, height, std::move(blocked), std::move(name));
}

GridMap load_map(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MapFormatError("cannot open map file: " + path);
  auto slash = path.find_last_of('/');
  std::string name = slash == std::string::npos ? path : path.substr(slash + 1);
  if (auto dot = name.rfind(".map"); dot != std::string::npos && dot + 4 == name.size()) name.resize(dot);
  return parse_map(in, name);
}

void write_map(std::ostream& out, const GridMap& map) {
  out << "type octile\nheight " << map.height() << "\nwidth " << map.width() << "\nmap\n";
  for (int r = 0; r < map.height(); ++r) {
    for (int c = 0; c < map.width(); ++c) out << (map.blocked(map.vertex(r, c)) ? '@' : '.');
    out << '\n';
  }
}

GridMap random_map(int width, int height, int blocked_cells, std::uint64_t seed) {
  const int n = width * height;
  if (blocked_cells < 0 || blocked_cells > n) throw MapFormatError("blocked cell count out of range");
  std::vector<int> cells(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) cells[static_cast<std::size_t>(i)] = i;
  Rng rng(seed);
  std::vector<bool> blocked(static_cast<std::size_t>(n), false);
  for (int i = 0; i < blocked_cells; ++i) {
    const auto j = static_cast<std::size_t>(i) + rng.index(static_cast<std::uint64_t>(n - i));
    std::swap(cells[static_cast<std::size_t>(i)], cells[j]);
    blocked[static_cast<std::size_t>(cells[static_cast<std::size_t>(i)])] = true;
  }
  return GridMap(width, height, std::move(blocked),
                 "random-" + std::to_string(width) + "-" + std::to_string(height) + "-" + std::to_string(seed));
}

std::vector<Vertex> largest_component(const GridMap& map) {
  if (map.passable_count() == 0) throw MapFormatError("map has no unblocked cells");
  std::vector<int> label(static_cast<std::size_t>(map.size()), -1);
  std::vector<Vertex> best;
  std::vector<Vertex> current;
  int next_label = 0;
  for (Vertex s = 0; s < map.size(); ++s) {
    if (map.blocked(s) || label[static_cast<std::size_t>(s)] >= 0) continue;
    current.clear();
    std::deque<Vertex> queue{s};
    label[static_cast<std::size_t>(s)] = next_label;
    while (!queue.empty()) {
      const Vertex u = queue.front();
      queue.pop_front();
      current.push_back(u);
      for (Vertex v : map.neighbors(u)) {
        if (label[static_cast<std::size_t>(v)] < 0) {
          label[static_cast<std::size_t>(v)] = next_label;
          queue.push_back(v);
        }
      }
    }
    ++next_label;
    // scanning in index order, so a strict improvement keeps the smallest-index tie winner
    if (current.size() > best.size()) best = current;
  }
  std::sort(best.begin(), best.end());
  return best;
}

DistanceField bfs_distance(const GridMap& map, Vertex source, std::optional<int> cap) {
  const Vertex sources[] = {source};
  return bfs_distance(map, sources, cap);
}

DistanceField bfs_distance(const GridMap& map, std::span<const Vertex> sources, std::optional<int> cap) {
  DistanceField field;
  field.sources.assign(sources.begin(), sources.end());
  field.dist.assign(static_cast<std::size_t>(map.size()), kUnreachable);
  std::deque<Vertex> queue;
  for (Vertex s : sources) {
    if (!map.passable(s)) throw std::invalid_argument("bfs source is blocked or out of range");
    if (field.dist[static_cast<std::size_t>(s)] != 0) {
      field.dist[static_cast<std::size_t>(s)] = 0;
      queue.push_back(s);
    }
  }
  while (!queue.empty()) {
    const Vertex u = queue.front();
    queue.pop_front();
    const int du = field.dist[static_cast<std::size_t>(u)];
    if (cap && du >= *cap) continue;
    for (Vertex v : map.neighbors(u)) {
      if (field.dist[static_cast<std::size_t>(v)] == kUnreachable) {
        field.dist[static_cast<std::size_t>(v)] = du + 1;
        queue.push_back(v);
      }
    }
  }
  return field;
}

std::array<int, 5> ring_counts(const GridMap& map, std::span<const Vertex> vertices) {
  std::array<int, 5> counts{};
  if (vertices.empty()) return counts;
  // Local BFS; touching only the radius-5 ball keeps this cheap on large maps.
  std::vector<Vertex> seen(vertices.begin(), vertices.end());
  std::sort(seen.begin(), seen.end());
  seen.erase(std::unique(seen.begin(), seen.end()), seen.end());
  for (Vertex v : seen) {
    if (!map.passable(v)) throw std::invalid_argument("ring_counts vertex is blocked");
  }
  std::vector<Vertex> layer = seen;
  std::set<Vertex> visited(seen.begin(), seen.end());
  for (int w = 1; w <= 5; ++w) {
    std::vector<Vertex> next;
    for (Vertex u : layer) {
      for (Vertex v : map.neighbors(u)) {
        if (visited.insert(v).second) next.push_back(v);
      }
    }
    counts[static_cast<std::size_t>(w - 1)] = static_cast<int>(next.size());
    layer = std::move(next);
  }
  return counts;
}

namespace {

std::vector<Vertex> sample_without_replacement(std::vector<Vertex> pool, int k, Rng& rng) {
  std::vector<Vertex> out;
  out.reserve(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) {
    const auto j = static_cast<std::size_t>(i) + rng.index(pool.size() - static_cast<std::size_t>(i));
    std::swap(pool[static_cast<std::size_t>(i)], pool[j]);
    out.push_back(pool[static_cast<std::size_t>(i)]);
  }
  return out;
}

}  // namespace

Instance generate_instance(std::shared_ptr<const GridMap> map, int agents, std::uint64_t seed) {
  if (!map) throw InstanceError("instance needs a map");
  if (agents < 0) throw InstanceError("agent count must be nonnegative");
  auto component = largest_component(*map);
  if (static_cast<std::size_t>(agents) > component.size()) {
    throw InstanceError("agent count " + std::to_string(agents) + " exceeds largest component size " +
                        std::to_string(component.size()));
  }
  Rng rng(seed);
  const auto starts = sample_without_replacement(component, agents, rng);
  const auto goals = sample_without_replacement(component, agents, rng);
  Instance instance{std::move(map), {}, seed};
  for (int i = 0; i < agents; ++i) {
    instance.tasks.push_back({starts[static_cast<std::size_t>(i)], goals[static_cast<std::size_t>(i)]});
  }
  return instance;
}

void write_instance(std::ostream& out, const Instance& instance) {
  const GridMap& map = *instance.map;
  out << instance.agents() << ' ' << instance.seed << '\n';
  for (const Task& task : instance.tasks) {
    out << map.row(task.start) << ' ' << map.col(task.start) << ' ' << map.row(task.goal) << ' '
        << map.col(task.goal) << '\n';
  }
}

Instance read_instance(std::istream& in, std::shared_ptr<const GridMap> map) {
  if (!map) throw InstanceError("instance needs a map");
  int k = 0;
  std::uint64_t seed = 0;
  if (!(in >> k >> seed) || k < 0) throw InstanceError("malformed instance header, expected 'k seed'");
  Instance instance{map, {}, seed};
  for (int i = 0; i < k; ++i) {
    int sr, sc, gr, gc;
    if (!(in >> sr >> sc >> gr >> gc)) throw InstanceError("instance truncated at agent " + std::to_string(i));
    auto cell = [&](int r, int c) {
      if (r < 0 || c < 0 || r >= map->height() || c >= map->width()) {
        throw InstanceError("instance cell out of range at agent " + std::to_string(i));
      }
      return map->vertex(r, c);
    };
    instance.tasks.push_back({cell(sr, sc), cell(gr, gc)});
  }
  validate_instance(instance);
  return instance;
}

void validate_instance(const Instance& instance) {
  const auto component = largest_component(*instance.map);
  std::vector<Vertex> starts;
  std::vector<Vertex> goals;
  for (const Task& task : instance.tasks) {
    if (!std::binary_search(component.begin(), component.end(), task.start) ||
        !std::binary_search(component.begin(), component.end(), task.goal)) {
      throw InstanceError("start or goal outside the largest connected component");
    }
    starts.push_back(task.start);
    goals.push_back(task.goal);
  }
  std::sort(starts.begin(), starts.end());
  std::sort(goals.begin(), goals.end());
  if (std::adjacent_find(starts.begin(), starts.end()) != starts.end()) throw InstanceError("duplicate start");
  if (std::adjacent_find(goals.begin(), goals.end()) != goals.end()) throw InstanceError("duplicate goal");
}

}  // namespace mlcbs
