#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "risklens/log_model.hpp"
#include "risklens/risk_types.hpp"

namespace risklens {

namespace detail {
class KdTree;
}

enum class Metric { kEuclidean };

std::string_view to_string(Metric metric);
Metric parse_metric(std::string_view name);

/// Squared Euclidean distance, accumulated in index order.
double squared_distance(std::span<const double> a, std::span<const double> b);

struct GraphNode {
  /// Normalized state that created the node.
  StateVector representative;
  std::uint64_t s_total = 1;
  std::uint64_t s_fatal = 0;

  bool operator==(const GraphNode&) const = default;
};

struct OutEdge {
  NodeId to = 0;
  std::uint64_t multiplicity = 0;

  bool operator==(const OutEdge&) const = default;
};

struct GraphEdge {
  NodeId from = 0;
  NodeId to = 0;
  std::uint64_t multiplicity = 0;

  bool operator==(const GraphEdge&) const = default;
};

// Directed multigraph over epsilon-radius nodes in normalized feature space.
//
// Nodes are created greedily while scanning the log: a state joins the
// nearest node whose representative is within epsilon (ties to the lowest
// id), otherwise it founds a new node. Consecutive records of an episode add
// one unit of multiplicity to the edge between their nodes; self-loops are
// kept. Immutable once built.
class TransitionGraph {
 public:
  TransitionGraph() = default;

  static TransitionGraph build(const TransitionLog& log, double epsilon,
                               Metric metric = Metric::kEuclidean);

  /// Assembles a graph from explicit parts (used by the loader and by tests).
  /// Edges must be unique per (from, to) with positive multiplicity.
  static TransitionGraph from_parts(double epsilon, FeatureSchema schema, Normalizer normalizer,
                                    std::vector<GraphNode> nodes, std::vector<GraphEdge> edges,
                                    Metric metric = Metric::kEuclidean);

  double epsilon() const noexcept { return epsilon_; }
  Metric metric() const noexcept { return metric_; }
  const FeatureSchema& schema() const noexcept { return schema_; }
  const Normalizer& normalizer() const noexcept { return normalizer_; }
  std::size_t dim() const noexcept { return schema_.dim(); }

  std::size_t node_count() const noexcept { return nodes_.size(); }
  const std::vector<GraphNode>& nodes() const noexcept { return nodes_; }
  const GraphNode& node(NodeId id) const { return nodes_.at(id); }

  /// Out-edges of `id`, sorted by target id.
  std::span<const OutEdge> out_edges(NodeId id) const;
  /// Distinct source nodes with an edge into `id`, sorted ascending.
  std::span<const NodeId> predecessors(NodeId id) const;

  std::size_t edge_count() const noexcept { return out_.size(); }
  std::uint64_t total_multiplicity() const noexcept;
  /// All edges ordered by (from, to).
  std::vector<GraphEdge> edges() const;

  /// Node whose representative is nearest to the clamped, normalized query.
  NodeId find_node(std::span<const double> raw_state) const;
  NodeId find_node_normalized(std::span<const double> normalized) const;

  /// Structural equality: epsilon, metric, schema, bounds, nodes and edges.
  bool operator==(const TransitionGraph& other) const;

 private:
  void index_edges(std::vector<GraphEdge> edges);

  double epsilon_ = 0.0;
  Metric metric_ = Metric::kEuclidean;
  FeatureSchema schema_;
  Normalizer normalizer_;
  std::vector<GraphNode> nodes_;

  // Compressed adjacency: out_[out_offsets_[i] .. out_offsets_[i+1]).
  std::vector<std::size_t> out_offsets_;
  std::vector<OutEdge> out_;
  std::vector<std::size_t> pred_offsets_;
  std::vector<NodeId> preds_;

  std::shared_ptr<const detail::KdTree> index_;
};

/// A graph plus whichever risk labelings have been computed for it. This is
/// the unit persisted to disk.
struct AnnotatedGraph {
  TransitionGraph graph;
  std::optional<BinaryRiskLabeling> binary;
  std::optional<ProbabilisticRisk> probabilistic;

  bool operator==(const AnnotatedGraph&) const = default;
};

inline constexpr int kGraphFileVersion = 1;

void save(const AnnotatedGraph& model, const std::filesystem::path& path);
void save(const TransitionGraph& graph, const std::filesystem::path& path);
AnnotatedGraph load(const std::filesystem::path& path);

std::string to_json_string(const AnnotatedGraph& model);
AnnotatedGraph from_json_string(std::string_view text);

}  // namespace risklens
