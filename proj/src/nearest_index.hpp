#pragma once

// Exact nearest-neighbour structures over node representatives. Both
// answer with the lexicographically smallest (squared distance, id) pair, so
// results match a linear scan bit for bit.

#include <array>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <unordered_map>
#include <vector>

#include "risklens/risk_types.hpp"

namespace risklens::detail {

struct Nearest {
  NodeId id = 0;
  double squared = std::numeric_limits<double>::infinity();

  bool improves_on(const Nearest& other) const {
    return squared < other.squared || (squared == other.squared && id < other.id);
  }
};

// Static k-d tree built once over all representatives.
class KdTree {
 public:
  KdTree(const std::vector<std::vector<double>>& points, std::size_t dim);

  Nearest nearest(std::span<const double> query) const;
  std::size_t size() const noexcept { return ids_.size(); }

 private:
  struct Node {
    // Leaves hold ids_[begin, end); inner nodes split on `axis` at `split`.
    std::size_t begin = 0;
    std::size_t end = 0;
    std::size_t axis = 0;
    double split = 0.0;
    std::int32_t left = -1;
    std::int32_t right = -1;
  };

  std::int32_t build(std::size_t begin, std::size_t end);
  void search(std::int32_t node, std::span<const double> query, Nearest& best) const;
  double coord(NodeId id, std::size_t axis) const { return coords_[id * dim_ + axis]; }

  std::size_t dim_;
  std::vector<double> coords_;
  std::vector<NodeId> ids_;
  std::vector<Node> nodes_;
};

// Uniform hash grid over the first (up to) three coordinates, sized so that
// every point within `radius` of a query lies in the 3^k block of cells around
// it. Supports incremental insertion during the greedy build.
class CellGrid {
 public:
  CellGrid(std::size_t dim, double radius);

  void insert(NodeId id, std::span<const double> point);
  // Nearest stored point among those that can lie within `radius`.
  Nearest nearest_candidate(std::span<const double> query,
                            const std::vector<std::vector<double>>& points) const;

 private:
  using Key = std::array<std::int64_t, 3>;
  struct KeyHash {
    std::size_t operator()(const Key& k) const noexcept;
  };

  Key key_of(std::span<const double> point) const;

  std::size_t projected_;
  double cell_;
  std::unordered_map<Key, std::vector<NodeId>, KeyHash> cells_;
};

}  // namespace risklens::detail
