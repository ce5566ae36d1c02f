#include "risklens/baseline_perturb.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "risklens/error.hpp"

namespace risklens {

namespace {
constexpr std::size_t kMaxMirroredFeatures = 16;
}

PerturbationSpec PerturbationSpec::uniform(std::size_t dim, int lo, int hi) {
  PerturbationSpec spec;
  spec.offsets.assign(dim, Range{lo, hi});
  return spec;
}

PerturbationSpec grid_perturbation_spec(const GridMap& map, int samples) {
  PerturbationSpec spec = PerturbationSpec::uniform(2);
  spec.samples = samples;
  auto tile = [map](std::span<const double> s) {
    return map.at_offset(static_cast<int>(std::lround(s[0])), static_cast<int>(std::lround(s[1])));
  };
  spec.valid = [tile](std::span<const double> s) { return tile(s) != Tile::kWall; };
  spec.label = [tile](std::span<const double> s) { return tile(s) == Tile::kLava ? 1 : 0; };
  return spec;
}

std::optional<Explanation> perturb_explain(std::span<const double> state,
                                           const PerturbationSpec& spec, std::uint64_t seed,
                                           const LogisticOptions& options) {
  const std::size_t dim = state.size();
  if (spec.offsets.size() != dim) {
    throw Error(ErrorCode::kDimensionMismatch, "perturbation ranges do not match state dimension");
  }
  if (spec.samples < 1) throw Error(ErrorCode::kInvalidArgument, "samples must be at least 1");
  if (!spec.valid || !spec.label) {
    throw Error(ErrorCode::kInvalidArgument, "perturbation spec needs validity and label oracles");
  }
  std::vector<std::size_t> mirror_dims;
  for (std::size_t d = 0; d < dim; ++d) {
    const auto& r = spec.offsets[d];
    if (r.lo > r.hi) throw Error(ErrorCode::kInvalidArgument, "empty perturbation range");
    if (spec.mirrored && r.lo == -r.hi && r.hi > 0) mirror_dims.push_back(d);
  }
  if (mirror_dims.size() > kMaxMirroredFeatures) {
    throw Error(ErrorCode::kInvalidArgument, "too many features for mirrored sampling");
  }

  std::mt19937_64 rng(seed);
  std::vector<StateVector> offsets;
  std::vector<int> labels;
  std::vector<double> delta(dim);
  StateVector perturbed(dim);
  const std::size_t orbit = std::size_t{1} << mirror_dims.size();
  std::size_t drawn = 0;

  for (int s = 0; s < spec.samples; ++s) {
    // Exactly one offset value per feature in each draw.
    for (std::size_t d = 0; d < dim; ++d) {
      const auto& r = spec.offsets[d];
      const auto width = static_cast<std::uint64_t>(r.hi - r.lo + 1);
      delta[d] = static_cast<double>(r.lo + static_cast<int>(rng() % width));
    }
    for (std::size_t mask = 0; mask < orbit; ++mask) {
      StateVector variant = delta;
      for (std::size_t k = 0; k < mirror_dims.size(); ++k) {
        if (mask & (std::size_t{1} << k)) variant[mirror_dims[k]] = -variant[mirror_dims[k]];
      }
      ++drawn;
      for (std::size_t d = 0; d < dim; ++d) perturbed[d] = state[d] + variant[d];
      if (!spec.valid(perturbed)) continue;
      labels.push_back(spec.label(perturbed) != 0 ? 1 : 0);
      offsets.push_back(std::move(variant));
    }
  }
  if (offsets.empty()) {
    throw Error(ErrorCode::kEmptyInput,
                "all " + std::to_string(drawn) + " perturbations were rejected as invalid");
  }
  const auto positives = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
  if (positives == 0 || positives == labels.size()) return std::nullopt;

  LinearFit fit = fit_logistic(offsets, labels, options);
  Explanation e;
  e.g = std::move(fit.weights);
  e.bias = fit.bias;
  e.mode = SurrogateMode::kClassification;
  e.reachable_size = offsets.size();
  e.risky_count = positives;
  return e;
}

}  // namespace risklens
