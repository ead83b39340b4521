#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace mlcbs {

using Vertex = int;

inline constexpr int kUnreachable = std::numeric_limits<int>::max();

class MapFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InstanceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Four-neighbor grid. Vertex index = row * width + col.
class GridMap {
 public:
  GridMap(int width, int height, std::vector<bool> blocked, std::string name = {});

  int width() const { return width_; }
  int height() const { return height_; }
  int size() const { return width_ * height_; }
  const std::string& name() const { return name_; }

  bool blocked(Vertex v) const { return blocked_[static_cast<std::size_t>(v)]; }
  bool passable(Vertex v) const { return v >= 0 && v < size() && !blocked(v); }
  int passable_count() const { return passable_count_; }

  Vertex vertex(int row, int col) const { return row * width_ + col; }
  int row(Vertex v) const { return v / width_; }
  int col(Vertex v) const { return v % width_; }

  // Passable four-neighbors of a passable vertex, ascending index order.
  std::span<const Vertex> neighbors(Vertex v) const {
    const auto b = offsets_[static_cast<std::size_t>(v)];
    const auto e = offsets_[static_cast<std::size_t>(v) + 1];
    return {adjacency_.data() + b, e - b};
  }
  bool adjacent(Vertex u, Vertex v) const;

  // Undirected edge count.
  std::size_t edge_count() const { return adjacency_.size() / 2; }

 private:
  int width_;
  int height_;
  std::vector<bool> blocked_;
  std::string name_;
  int passable_count_ = 0;
  std::vector<std::size_t> offsets_;
  std::vector<Vertex> adjacency_;
};

// MovingAI `.map` text: `type octile`, `height H`, `width W`, `map`, H rows.
GridMap parse_map(std::istream& in, std::string name = {});
GridMap load_map(const std::string& path);
void write_map(std::ostream& out, const GridMap& map);

// Uniformly places exactly `blocked_cells` obstacles.
GridMap random_map(int width, int height, int blocked_cells, std::uint64_t seed);

// Largest connected set of passable cells (sorted); ties go to the component
// holding the smallest vertex index.
std::vector<Vertex> largest_component(const GridMap& map);

struct DistanceField {
  std::vector<Vertex> sources;
  std::vector<int> dist;  // kUnreachable beyond the cap or disconnected

  int operator[](Vertex v) const { return dist[static_cast<std::size_t>(v)]; }
};

DistanceField bfs_distance(const GridMap& map, Vertex source, std::optional<int> cap = std::nullopt);
DistanceField bfs_distance(const GridMap& map, std::span<const Vertex> sources,
                           std::optional<int> cap = std::nullopt);

// counts[w-1] = number of vertices whose distance to the set is exactly w, w = 1..5.
std::array<int, 5> ring_counts(const GridMap& map, std::span<const Vertex> vertices);

struct Task {
  Vertex start;
  Vertex goal;
  bool operator==(const Task&) const = default;
};

struct Instance {
  std::shared_ptr<const GridMap> map;
  std::vector<Task> tasks;
  std::uint64_t seed = 0;

  int agents() const { return static_cast<int>(tasks.size()); }
};

Instance generate_instance(std::shared_ptr<const GridMap> map, int agents, std::uint64_t seed);

// Instance text: `k seed` then k lines `start_row start_col goal_row goal_col`.
void write_instance(std::ostream& out, const Instance& instance);
Instance read_instance(std::istream& in, std::shared_ptr<const GridMap> map);

// Throws InstanceError when starts or goals repeat or leave the largest component.
void validate_instance(const Instance& instance);

}  // namespace mlcbs
