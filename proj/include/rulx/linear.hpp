#pragma once

#include "rulx/predictor.hpp"

#include <cstdint>
#include <vector>

namespace rulx {

/// y = w.x + b
class LinearModel final : public Predictor {
 public:
  LinearModel() = default;
  LinearModel(Vector weights, double intercept) : weights_(std::move(weights)), intercept_(intercept) {}

  std::size_t arity() const override { return static_cast<std::size_t>(weights_.size()); }
  const Vector& weights() const { return weights_; }
  double intercept() const { return intercept_; }

  bool converged = true;
  std::size_t iterations = 0;
  /// Objective after each full pass (coordinate sweep or epoch); index 0 is the starting point.
  std::vector<double> objective_trace;

 protected:
  double predict_row(const Eigen::Ref<const Vector>& x) const override { return weights_.dot(x) + intercept_; }

 private:
  Vector weights_;
  double intercept_ = 0.0;
};

struct ElasticNetParams {
  double alpha = 0.01;
  double l1_ratio = 0.01;
  bool fit_intercept = true;
  double tol = 1e-4;
  std::size_t max_iter = 10000;

  void validate() const;
};

/// (1/2N)|y - Xw - b|^2 + alpha * (l1_ratio |w|_1 + (1 - l1_ratio)/2 |w|^2)
double elastic_net_objective(const Matrix& x, const Vector& y, const Vector& w, double b, const ElasticNetParams& params);

/// Cyclic coordinate descent with soft-thresholding. Stops once the largest
/// coefficient change in a sweep falls below tol; otherwise returns with
/// converged = false after max_iter sweeps.
LinearModel fit_elastic_net(const Matrix& x, const Vector& y, const ElasticNetParams& params);

struct SvrParams {
  double epsilon = 0.1;
  double c = 1.0;
  std::size_t epochs = 50;
  double step_size = 0.01;
  std::uint64_t seed = 0;

  void validate() const;
};

/// c * sum max(0, |y - w.x - b| - epsilon) + |w|^2 / 2
double svr_objective(const Matrix& x, const Vector& y, const Vector& w, double b, const SvrParams& params);
/// Mean epsilon-insensitive loss over the rows.
double epsilon_insensitive_loss(const Matrix& x, const Vector& y, const Vector& w, double b, double epsilon);

/// Linear SVR by seeded stochastic subgradient descent. Starts from w = 0 and
/// b = midrange(y); step size decays as step_size / sqrt(1 + epoch).
LinearModel fit_svr(const Matrix& x, const Vector& y, const SvrParams& params);

}  // namespace rulx
