#include "risklens/risk.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

#include "risklens/error.hpp"

namespace risklens {

BinaryRiskLabeling label_binary(const TransitionGraph& graph, DeadEndPolicy dead_ends) {
  const std::size_t n = graph.node_count();
  BinaryRiskLabeling labeling;
  labeling.dead_ends = dead_ends;
  labeling.risky.assign(n, false);

  // safe_successors[v]: out-neighbours of v not yet known to be risky.
  std::vector<std::size_t> safe_successors(n);
  std::deque<NodeId> worklist;
  for (NodeId v = 0; v < n; ++v) {
    const auto out = graph.out_edges(v);
    safe_successors[v] = out.size();
    const bool seed = graph.node(v).s_fatal > 0 || (out.empty() && dead_ends == DeadEndPolicy::kRisky);
    if (seed) {
      labeling.risky[v] = true;
      worklist.push_back(v);
    }
  }

  while (!worklist.empty()) {
    const NodeId r = worklist.front();
    worklist.pop_front();
    for (NodeId p : graph.predecessors(r)) {
      if (labeling.risky[p]) continue;
      if (--safe_successors[p] == 0) {
        labeling.risky[p] = true;
        worklist.push_back(p);
      }
    }
  }
  return labeling;
}

ProbabilisticRisk risk_init(const TransitionGraph& graph) {
  ProbabilisticRisk risk;
  risk.values.reserve(graph.node_count());
  for (const auto& node : graph.nodes()) {
    risk.values.push_back(node.s_fatal != 0 ? 0.5 + static_cast<double>(node.s_fatal) /
                                                        (2.0 * static_cast<double>(node.s_total))
                                            : 0.0);
  }
  return risk;
}

ProbabilisticRisk risk_iterate(const TransitionGraph& graph, const ProbabilisticRisk& risk,
                               double learning_rate, int iterations) {
  if (!(learning_rate > 0.0 && learning_rate < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "learning rate must lie in (0, 1)");
  }
  if (iterations < 0) throw Error(ErrorCode::kInvalidArgument, "iterations must be non-negative");
  if (risk.values.size() != graph.node_count()) {
    throw Error(ErrorCode::kDimensionMismatch, "risk values do not match graph node count");
  }

  ProbabilisticRisk result = risk;
  if (iterations == 0) return result;

  std::vector<double> next(result.values.size());
  for (int it = 0; it < iterations; ++it) {
    const std::vector<double>& current = result.values;
    for (NodeId s = 0; s < current.size(); ++s) {
      const auto out = graph.out_edges(s);
      if (out.empty()) {
        next[s] = current[s];
        continue;
      }
      double weighted = 0.0;
      double total = 0.0;
      for (const auto& e : out) {
        const double m = static_cast<double>(e.multiplicity);
        weighted += current[e.to] * current[e.to] * m;
        total += m;
      }
      const double blended =
          (1.0 - learning_rate) * current[s] + learning_rate * std::sqrt(weighted / total);
      // The blend is a convex combination; clamping only absorbs rounding.
      next[s] = std::clamp(blended, 0.0, 1.0);
    }
    result.values.swap(next);
  }
  result.iterations = risk.iterations + iterations;
  result.learning_rate = learning_rate;
  return result;
}

}  // namespace risklens
