#pragma once

#include "risklens/risk_types.hpp"
#include "risklens/transition_graph.hpp"

namespace risklens {

// Least fixed point of: a node is risky if it holds a fatal state, or if it
// has at least one outgoing edge and every out-neighbour is risky. Under
// DeadEndPolicy::kRisky, nodes with no outgoing edges are seeded as risky
// instead (the vacuous reading of the rule). Runs in O(V + E).
BinaryRiskLabeling label_binary(const TransitionGraph& graph,
                                DeadEndPolicy dead_ends = DeadEndPolicy::kSafe);

/// R0(s) = 0.5 + s_fatal / (2 s_total) when s_fatal > 0, else 0.
ProbabilisticRisk risk_init(const TransitionGraph& graph);

// Applies `iterations` synchronous updates
//
//   R'(s) = (1 - l) R(s) + l * sqrt( sum_k R(k)^2 V(s,k) / sum_k V(s,k) )
//
// over out-neighbours k with edge multiplicities V. Nodes without outgoing
// edges keep their value. Zero iterations returns the input unchanged.
// Throws if l is not in (0, 1) or iterations is negative.
ProbabilisticRisk risk_iterate(const TransitionGraph& graph, const ProbabilisticRisk& risk,
                               double learning_rate, int iterations);

}  // namespace risklens
