#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "risklens/explain.hpp"
#include "risklens/toyenvs.hpp"

namespace risklens {

// Transition-blind local surrogate: perturb the query state by random integer
// offsets, drop perturbations the validity oracle rejects, label the rest with
// the label oracle and fit the same logistic surrogate as direction_of_risk.
// Weights are expressed per raw feature (per unit of offset).
struct PerturbationSpec {
  struct Range {
    int lo = -3;
    int hi = 3;
  };

  std::vector<Range> offsets;  // one inclusive range per feature
  int samples = 1000;
  // Expand every draw into all sign flips of the features whose range is
  // symmetric about zero. Keeps each marginal uniform and makes weights of
  // mirror-symmetric features vanish exactly rather than up to sampling noise.
  bool mirrored = true;
  std::function<bool(std::span<const double>)> valid;
  std::function<int(std::span<const double>)> label;

  static PerturbationSpec uniform(std::size_t dim, int lo = -3, int hi = 3);
};

/// Perturbation setup for the lava gridworld: walls (and off-map cells) are
/// invalid, lava is labelled 1. States are (x, y) offsets from the start.
PerturbationSpec grid_perturbation_spec(const GridMap& map, int samples = 1000);

/// Throws when every perturbation is invalid; returns nullopt when the valid
/// ones are single-class.
std::optional<Explanation> perturb_explain(std::span<const double> state,
                                           const PerturbationSpec& spec, std::uint64_t seed,
                                           const LogisticOptions& options = {});

}  // namespace risklens
