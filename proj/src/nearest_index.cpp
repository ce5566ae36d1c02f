#include "nearest_index.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "risklens/transition_graph.hpp"

namespace risklens::detail {

namespace {
constexpr std::size_t kLeafSize = 8;
}

KdTree::KdTree(const std::vector<std::vector<double>>& points, std::size_t dim) : dim_(dim) {
  coords_.reserve(points.size() * dim);
  for (const auto& p : points) coords_.insert(coords_.end(), p.begin(), p.end());
  ids_.resize(points.size());
  std::iota(ids_.begin(), ids_.end(), NodeId{0});
  if (!ids_.empty()) build(0, ids_.size());
}

std::int32_t KdTree::build(std::size_t begin, std::size_t end) {
  const auto index = static_cast<std::int32_t>(nodes_.size());
  nodes_.push_back(Node{begin, end});
  if (end - begin <= kLeafSize || dim_ == 0) return index;

  std::size_t axis = 0;
  double widest = -1.0;
  for (std::size_t d = 0; d < dim_; ++d) {
    auto [lo, hi] = std::minmax_element(ids_.begin() + begin, ids_.begin() + end,
                                        [&](NodeId a, NodeId b) { return coord(a, d) < coord(b, d); });
    const double spread = coord(*hi, d) - coord(*lo, d);
    if (spread > widest) {
      widest = spread;
      axis = d;
    }
  }
  if (widest <= 0.0) return index;  // all points coincide

  const std::size_t mid = begin + (end - begin) / 2;
  std::nth_element(ids_.begin() + begin, ids_.begin() + mid, ids_.begin() + end,
                   [&](NodeId a, NodeId b) { return coord(a, axis) < coord(b, axis); });
  const double split = coord(ids_[mid], axis);

  const std::int32_t left = build(begin, mid);
  const std::int32_t right = build(mid, end);
  Node& node = nodes_[index];
  node.axis = axis;
  node.split = split;
  node.left = left;
  node.right = right;
  return index;
}

Nearest KdTree::nearest(std::span<const double> query) const {
  Nearest best;
  if (!nodes_.empty()) search(0, query, best);
  return best;
}

void KdTree::search(std::int32_t index, std::span<const double> query, Nearest& best) const {
  const Node& node = nodes_[index];
  if (node.left < 0) {
    for (std::size_t i = node.begin; i < node.end; ++i) {
      const NodeId id = ids_[i];
      const Nearest candidate{id, squared_distance(query, {coords_.data() + id * dim_, dim_})};
      if (candidate.improves_on(best)) best = candidate;
    }
    return;
  }
  // Left holds coordinates <= split, right holds coordinates >= split.
  const double diff = query[node.axis] - node.split;
  const std::int32_t near = diff <= 0.0 ? node.left : node.right;
  const std::int32_t far = diff <= 0.0 ? node.right : node.left;
  search(near, query, best);
  // Equality must not prune: a tie on the far side may carry a lower id.
  if (diff * diff <= best.squared) search(far, query, best);
}

CellGrid::CellGrid(std::size_t dim, double radius)
    : projected_(std::min<std::size_t>(dim, 3)), cell_(radius * (1.0 + 1e-9)) {}

std::size_t CellGrid::KeyHash::operator()(const Key& k) const noexcept {
  std::uint64_t h = 1469598103934665603ull;
  for (auto v : k) {
    h ^= static_cast<std::uint64_t>(v) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
  }
  return static_cast<std::size_t>(h);
}

CellGrid::Key CellGrid::key_of(std::span<const double> point) const {
  Key key{0, 0, 0};
  for (std::size_t d = 0; d < projected_; ++d) {
    key[d] = static_cast<std::int64_t>(std::floor(point[d] / cell_));
  }
  return key;
}

void CellGrid::insert(NodeId id, std::span<const double> point) {
  cells_[key_of(point)].push_back(id);
}

Nearest CellGrid::nearest_candidate(std::span<const double> query,
                                    const std::vector<std::vector<double>>& points) const {
  Nearest best;
  const Key center = key_of(query);
  std::size_t combos = 1;
  for (std::size_t d = 0; d < projected_; ++d) combos *= 3;

  for (std::size_t c = 0; c < combos; ++c) {
    Key key = center;
    std::size_t rest = c;
    for (std::size_t d = 0; d < projected_; ++d) {
      key[d] += static_cast<std::int64_t>(rest % 3) - 1;
      rest /= 3;
    }
    auto it = cells_.find(key);
    if (it == cells_.end()) continue;
    for (NodeId id : it->second) {
      const Nearest candidate{id, squared_distance(query, points[id])};
      if (candidate.improves_on(best)) best = candidate;
    }
  }
  return best;
}

}  // namespace risklens::detail
