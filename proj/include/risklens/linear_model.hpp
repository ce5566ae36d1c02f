#pragma once

#include <span>
#include <vector>

#include "risklens/log_model.hpp"

namespace risklens {

struct LinearFit {
  std::vector<double> weights;
  double bias = 0.0;
};

// Full-batch gradient descent on the mean logistic loss plus
// (reg / 2) * ||w||^2, run on mean-centered features. The bias is not
// penalized. Starts from zero and uses a constant step, so identical inputs
// give bit-identical weights.
struct LogisticOptions {
  double reg = 1e-3;
  double step = 0.1;
  int iterations = 500;
};

LinearFit fit_logistic(std::span<const StateVector> samples, std::span<const int> labels,
                       const LogisticOptions& options = {});

// Minimizes mean squared error plus reg * ||w||^2 with an unpenalized bias,
// via a rank-revealing orthogonal decomposition of the centered design. Rank
// deficient problems get the minimum-norm weights.
LinearFit fit_ridge(std::span<const StateVector> samples, std::span<const double> targets,
                    double reg);

}  // namespace risklens
