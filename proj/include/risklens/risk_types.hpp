#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace risklens {

using NodeId = std::uint32_t;

// How nodes without outgoing edges and without fatal states are treated by
// the binary labeler. A dead end may be a successful episode end, so the
// shipped convention is kSafe.
enum class DeadEndPolicy { kSafe, kRisky };

struct BinaryRiskLabeling {
  std::vector<bool> risky;
  DeadEndPolicy dead_ends = DeadEndPolicy::kSafe;

  bool is_risky(NodeId id) const { return risky.at(id); }
  std::size_t risky_count() const;
  std::vector<NodeId> risky_ids() const;

  bool operator==(const BinaryRiskLabeling&) const = default;
};

/// Recursive per-node risk values in [0,1] together with the schedule that
/// produced them.
struct ProbabilisticRisk {
  std::vector<double> values;
  int iterations = 0;
  double learning_rate = 0.0;

  bool operator==(const ProbabilisticRisk&) const = default;
};

}  // namespace risklens
