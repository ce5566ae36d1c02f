#include "risklens/linear_model.hpp"

#include <cmath>

#include <Eigen/Dense>

#include "risklens/error.hpp"

namespace risklens {

namespace {

std::size_t check_samples(std::span<const StateVector> samples, std::size_t n_targets) {
  if (samples.empty()) throw Error(ErrorCode::kEmptyInput, "surrogate fit needs at least one sample");
  if (samples.size() != n_targets) {
    throw Error(ErrorCode::kDimensionMismatch, "sample and target counts differ");
  }
  const std::size_t dim = samples.front().size();
  for (const auto& x : samples) {
    if (x.size() != dim) throw Error(ErrorCode::kDimensionMismatch, "samples differ in dimension");
  }
  return dim;
}

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

}  // namespace

LinearFit fit_logistic(std::span<const StateVector> samples, std::span<const int> labels,
                       const LogisticOptions& options) {
  const std::size_t dim = check_samples(samples, labels.size());
  if (options.reg < 0.0 || !(options.step > 0.0) || options.iterations < 1) {
    throw Error(ErrorCode::kInvalidArgument, "logistic options need reg >= 0, step > 0, iterations >= 1");
  }
  const double inv_m = 1.0 / static_cast<double>(samples.size());

  // Descent runs on centered features. The optimum is the same (the bias is
  // free), but a feature that is constant over the sample set then keeps a
  // weight of zero instead of drifting along with the bias.
  std::vector<double> mean(dim, 0.0);
  for (const auto& x : samples) {
    for (std::size_t d = 0; d < dim; ++d) mean[d] += x[d];
  }
  for (double& v : mean) v *= inv_m;

  LinearFit fit{std::vector<double>(dim, 0.0), 0.0};
  std::vector<double> grad(dim);
  std::vector<double> centered(dim);
  for (int it = 0; it < options.iterations; ++it) {
    std::fill(grad.begin(), grad.end(), 0.0);
    double grad_bias = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
      const auto& x = samples[i];
      double z = fit.bias;
      for (std::size_t d = 0; d < dim; ++d) {
        centered[d] = x[d] - mean[d];
        z += fit.weights[d] * centered[d];
      }
      const double residual = sigmoid(z) - (labels[i] != 0 ? 1.0 : 0.0);
      for (std::size_t d = 0; d < dim; ++d) grad[d] += residual * centered[d];
      grad_bias += residual;
    }
    for (std::size_t d = 0; d < dim; ++d) {
      fit.weights[d] -= options.step * (grad[d] * inv_m + options.reg * fit.weights[d]);
    }
    fit.bias -= options.step * grad_bias * inv_m;
  }
  for (std::size_t d = 0; d < dim; ++d) fit.bias -= fit.weights[d] * mean[d];
  return fit;
}

LinearFit fit_ridge(std::span<const StateVector> samples, std::span<const double> targets,
                    double reg) {
  const std::size_t dim = check_samples(samples, targets.size());
  if (reg < 0.0) throw Error(ErrorCode::kInvalidArgument, "ridge penalty must be non-negative");
  const auto m = static_cast<Eigen::Index>(samples.size());
  const auto p = static_cast<Eigen::Index>(dim);

  Eigen::VectorXd x_mean = Eigen::VectorXd::Zero(p);
  double y_mean = 0.0;
  for (Eigen::Index i = 0; i < m; ++i) {
    x_mean += Eigen::Map<const Eigen::VectorXd>(samples[i].data(), p);
    y_mean += targets[i];
  }
  x_mean /= static_cast<double>(m);
  y_mean /= static_cast<double>(m);

  // Stack the penalty under the centered design:
  //   [ Xc            ] w ~ [ yc ]
  //   [ sqrt(m reg) I ]     [ 0  ]
  const Eigen::Index rows = reg > 0.0 ? m + p : m;
  Eigen::MatrixXd design = Eigen::MatrixXd::Zero(rows, p);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(rows);
  for (Eigen::Index i = 0; i < m; ++i) {
    design.row(i) = Eigen::Map<const Eigen::VectorXd>(samples[i].data(), p).transpose() - x_mean.transpose();
    rhs(i) = targets[i] - y_mean;
  }
  if (reg > 0.0) {
    design.bottomRows(p).diagonal().setConstant(std::sqrt(static_cast<double>(m) * reg));
  }

  const Eigen::VectorXd w = design.completeOrthogonalDecomposition().solve(rhs);
  LinearFit fit{std::vector<double>(w.data(), w.data() + p), y_mean - w.dot(x_mean)};
  return fit;
}

}  // namespace risklens
