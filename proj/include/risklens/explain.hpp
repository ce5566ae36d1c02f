#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "risklens/linear_model.hpp"
#include "risklens/risk_types.hpp"
#include "risklens/transition_graph.hpp"

namespace risklens {

struct ReachedNode {
  NodeId id = 0;
  int depth = 0;

  bool operator==(const ReachedNode&) const = default;
};

/// Nodes within `depth` directed hops of `origin`, in BFS order, each tagged
/// with its minimal hop count. The origin comes first at depth 0.
struct ReachableSet {
  NodeId origin = 0;
  int depth = 0;
  std::vector<ReachedNode> nodes;

  std::size_t size() const noexcept { return nodes.size(); }
  bool contains(NodeId id) const;
};

ReachableSet reachable_from(const TransitionGraph& graph, NodeId origin, int depth);
ReachableSet reachable(const TransitionGraph& graph, std::span<const double> raw_state, int depth);

enum class SurrogateMode { kClassification, kRegression };

// Direction of risk: weights of a linear surrogate fitted over the reachable
// set, one per schema feature, in normalized-feature units. The bias is kept
// apart from g.
struct Explanation {
  std::vector<double> g;
  double bias = 0.0;
  SurrogateMode mode = SurrogateMode::kClassification;
  NodeId origin = 0;
  std::size_t reachable_size = 0;
  // Classification: reachable nodes labelled risky. Regression: reachable
  // nodes with non-zero risk value.
  std::size_t risky_count = 0;
  bool query_clamped = false;
};

/// Classification surrogate on binary labels. Returns nullopt (no direction)
/// when every reachable node carries the same label.
std::optional<Explanation> direction_of_risk(const TransitionGraph& graph,
                                             const BinaryRiskLabeling& risk,
                                             std::span<const double> raw_state, int depth,
                                             const LogisticOptions& options = {});

/// Ridge surrogate on probabilistic risk values. Returns nullopt when the
/// reachable set is a single node.
std::optional<Explanation> direction_of_risk_regression(const TransitionGraph& graph,
                                                        const ProbabilisticRisk& risk,
                                                        std::span<const double> raw_state,
                                                        int depth, double reg);

/// Rescales normalized-space weights to raw units: w_d / (max_d - min_d).
/// Degenerate dimensions report 0.
std::vector<double> denormalize_weights(std::span<const double> g, const Normalizer& normalizer);

struct DistanceToRisk {
  int hops = 0;
  // True when no risky node lies within `cap` hops; hops then equals cap.
  bool capped = false;

  bool operator==(const DistanceToRisk&) const = default;
};

DistanceToRisk distance_to_risk_from(const TransitionGraph& graph, const BinaryRiskLabeling& risk,
                                     NodeId origin, int cap);
DistanceToRisk distance_to_risk(const TransitionGraph& graph, const BinaryRiskLabeling& risk,
                                std::span<const double> raw_state, int cap);

enum class TraceMode { kDistanceOnly, kClassification, kRegression };

struct TraceOptions {
  int depth = 6;
  int cap = 6;
  TraceMode mode = TraceMode::kClassification;
  LogisticOptions logistic;
  double ridge = 1e-3;
};

struct TraceStep {
  DistanceToRisk distance;
  std::optional<std::vector<double>> g;  // empty for no direction

  bool operator==(const TraceStep&) const = default;
};

struct EpisodeTrace {
  int cap = 0;
  std::vector<std::string> features;
  std::vector<TraceStep> steps;

  std::size_t size() const noexcept { return steps.size(); }
  bool operator==(const EpisodeTrace&) const = default;
};

/// Distance to risk (and, unless kDistanceOnly, a direction column) for each
/// state of an episode, in order. Requires the binary labeling; regression
/// mode additionally requires probabilistic values.
EpisodeTrace trace_episode(const AnnotatedGraph& model, std::span<const StateVector> episode,
                           const TraceOptions& options);

}  // namespace risklens
