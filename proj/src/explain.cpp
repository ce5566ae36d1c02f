#include "risklens/explain.hpp"

#include <algorithm>
#include <deque>

#include "risklens/error.hpp"

namespace risklens {

bool ReachableSet::contains(NodeId id) const {
  return std::any_of(nodes.begin(), nodes.end(), [id](const ReachedNode& r) { return r.id == id; });
}

ReachableSet reachable_from(const TransitionGraph& graph, NodeId origin, int depth) {
  if (depth < 1) throw Error(ErrorCode::kInvalidArgument, "depth limit must be at least 1");
  if (origin >= graph.node_count()) throw Error(ErrorCode::kInvalidArgument, "origin node out of range");

  ReachableSet result{origin, depth, {}};
  std::vector<int> seen(graph.node_count(), -1);
  std::deque<NodeId> frontier{origin};
  seen[origin] = 0;
  while (!frontier.empty()) {
    const NodeId v = frontier.front();
    frontier.pop_front();
    result.nodes.push_back(ReachedNode{v, seen[v]});
    if (seen[v] == depth) continue;
    for (const auto& e : graph.out_edges(v)) {
      if (seen[e.to] < 0) {
        seen[e.to] = seen[v] + 1;
        frontier.push_back(e.to);
      }
    }
  }
  return result;
}

ReachableSet reachable(const TransitionGraph& graph, std::span<const double> raw_state, int depth) {
  return reachable_from(graph, graph.find_node(raw_state), depth);
}

namespace {

struct Query {
  NodeId origin;
  bool clamped;
};

Query locate(const TransitionGraph& graph, std::span<const double> raw_state) {
  if (raw_state.size() != graph.dim()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "state has " + std::to_string(raw_state.size()) + " components, graph expects " +
                    std::to_string(graph.dim()));
  }
  const NormalizedState z = graph.normalizer().normalize_clamped(raw_state);
  return {graph.find_node_normalized(z.values), z.clamped};
}

}  // namespace

std::optional<Explanation> direction_of_risk(const TransitionGraph& graph,
                                             const BinaryRiskLabeling& risk,
                                             std::span<const double> raw_state, int depth,
                                             const LogisticOptions& options) {
  if (depth < 1) throw Error(ErrorCode::kInvalidArgument, "depth limit must be at least 1");
  if (risk.risky.size() != graph.node_count()) {
    throw Error(ErrorCode::kDimensionMismatch, "risk labeling does not match graph node count");
  }
  const Query q = locate(graph, raw_state);
  const ReachableSet set = reachable_from(graph, q.origin, depth);

  std::vector<StateVector> samples;
  std::vector<int> labels;
  samples.reserve(set.size());
  labels.reserve(set.size());
  for (const auto& r : set.nodes) {
    samples.push_back(graph.node(r.id).representative);
    labels.push_back(risk.risky[r.id] ? 1 : 0);
  }
  const auto risky = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
  if (risky == 0 || risky == labels.size()) return std::nullopt;

  LinearFit fit = fit_logistic(samples, labels, options);
  return Explanation{std::move(fit.weights), fit.bias, SurrogateMode::kClassification,
                     q.origin, set.size(), risky, q.clamped};
}

std::optional<Explanation> direction_of_risk_regression(const TransitionGraph& graph,
                                                        const ProbabilisticRisk& risk,
                                                        std::span<const double> raw_state,
                                                        int depth, double reg) {
  if (depth < 1) throw Error(ErrorCode::kInvalidArgument, "depth limit must be at least 1");
  if (risk.values.size() != graph.node_count()) {
    throw Error(ErrorCode::kDimensionMismatch, "risk values do not match graph node count");
  }
  const Query q = locate(graph, raw_state);
  const ReachableSet set = reachable_from(graph, q.origin, depth);
  if (set.size() < 2) return std::nullopt;

  std::vector<StateVector> samples;
  std::vector<double> targets;
  std::size_t nonzero = 0;
  for (const auto& r : set.nodes) {
    samples.push_back(graph.node(r.id).representative);
    targets.push_back(risk.values[r.id]);
    if (risk.values[r.id] != 0.0) ++nonzero;
  }
  LinearFit fit = fit_ridge(samples, targets, reg);
  return Explanation{std::move(fit.weights), fit.bias, SurrogateMode::kRegression,
                     q.origin, set.size(), nonzero, q.clamped};
}

std::vector<double> denormalize_weights(std::span<const double> g, const Normalizer& normalizer) {
  if (g.size() != normalizer.dim()) {
    throw Error(ErrorCode::kDimensionMismatch, "weight vector does not match normalizer dimension");
  }
  std::vector<double> out(g.size());
  for (std::size_t d = 0; d < g.size(); ++d) {
    const double range = normalizer.range(d);
    out[d] = range > 0.0 ? g[d] / range : 0.0;
  }
  return out;
}

DistanceToRisk distance_to_risk_from(const TransitionGraph& graph, const BinaryRiskLabeling& risk,
                                     NodeId origin, int cap) {
  if (cap < 1) throw Error(ErrorCode::kInvalidArgument, "distance cap must be at least 1");
  if (risk.risky.size() != graph.node_count()) {
    throw Error(ErrorCode::kDimensionMismatch, "risk labeling does not match graph node count");
  }
  // BFS order visits nodes by non-decreasing depth, so the first risky node
  // found is the nearest one.
  for (const auto& r : reachable_from(graph, origin, cap).nodes) {
    if (risk.risky[r.id]) return DistanceToRisk{r.depth, false};
  }
  return DistanceToRisk{cap, true};
}

DistanceToRisk distance_to_risk(const TransitionGraph& graph, const BinaryRiskLabeling& risk,
                                std::span<const double> raw_state, int cap) {
  return distance_to_risk_from(graph, risk, locate(graph, raw_state).origin, cap);
}

EpisodeTrace trace_episode(const AnnotatedGraph& model, std::span<const StateVector> episode,
                           const TraceOptions& options) {
  if (!model.binary) {
    throw Error(ErrorCode::kInvalidArgument, "tracing needs a binary risk labeling on the graph");
  }
  if (options.mode == TraceMode::kRegression && !model.probabilistic) {
    throw Error(ErrorCode::kInvalidArgument,
                "regression traces need probabilistic risk values on the graph");
  }
  const TransitionGraph& graph = model.graph;
  EpisodeTrace trace{options.cap, graph.schema().names(), {}};
  trace.steps.reserve(episode.size());
  for (const auto& state : episode) {
    TraceStep step{distance_to_risk(graph, *model.binary, state, options.cap), std::nullopt};
    std::optional<Explanation> e;
    switch (options.mode) {
      case TraceMode::kDistanceOnly:
        break;
      case TraceMode::kClassification:
        e = direction_of_risk(graph, *model.binary, state, options.depth, options.logistic);
        break;
      case TraceMode::kRegression:
        e = direction_of_risk_regression(graph, *model.probabilistic, state, options.depth,
                                         options.ridge);
        break;
    }
    if (e) step.g = std::move(e->g);
    trace.steps.push_back(std::move(step));
  }
  return trace;
}

}  // namespace risklens
