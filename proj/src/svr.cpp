#include "rulx/linear.hpp"

#include "rulx/random.hpp"

#include <cmath>
#include <numeric>

namespace rulx {

void SvrParams::validate() const {
  require(epsilon >= 0.0 && std::isfinite(epsilon), "epsilon must be non-negative");
  require(c > 0.0 && std::isfinite(c), "c must be positive");
  require(step_size > 0.0 && std::isfinite(step_size), "step_size must be positive");
}

double epsilon_insensitive_loss(const Matrix& x, const Vector& y, const Vector& w, double b, double epsilon) {
  const Vector residual = (y - x * w).array() - b;
  return (residual.array().abs() - epsilon).max(0.0).mean();
}

double svr_objective(const Matrix& x, const Vector& y, const Vector& w, double b, const SvrParams& p) {
  const double n = static_cast<double>(y.size());
  return p.c * n * epsilon_insensitive_loss(x, y, w, b, p.epsilon) + 0.5 * w.squaredNorm();
}

LinearModel fit_svr(const Matrix& x, const Vector& y, const SvrParams& params) {
  params.validate();
  if (x.rows() == 0) fail(ErrorKind::training, "cannot fit SVR on an empty training set");
  require(x.rows() == y.size(), "feature and target row counts differ");

  const auto n = static_cast<std::size_t>(x.rows());
  Vector w = Vector::Zero(x.cols());
  double b = 0.5 * (y.minCoeff() + y.maxCoeff());
  const double shrink = 1.0 / static_cast<double>(n);

  std::vector<double> trace{svr_objective(x, y, w, b, params)};
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(derive_seed(params.seed, "svr"));

  for (std::size_t epoch = 0; epoch < params.epochs; ++epoch) {
    for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[uniform_index(rng, i)]);
    const double eta = params.step_size / std::sqrt(1.0 + static_cast<double>(epoch));
    for (std::size_t i : order) {
      const double residual = y(i) - (x.row(i).dot(w) + b);
      // Per-sample share of the subgradient: c * dL_i + w / N.
      w *= 1.0 - eta * shrink;
      if (std::abs(residual) > params.epsilon) {
        const double direction = residual > 0.0 ? 1.0 : -1.0;
        w += (eta * params.c * direction) * x.row(i).transpose();
        b += eta * params.c * direction;
      }
    }
    const double objective = svr_objective(x, y, w, b, params);
    if (!std::isfinite(objective))
      fail(ErrorKind::training, "SVR diverged at epoch " + std::to_string(epoch + 1));
    trace.push_back(objective);
  }

  LinearModel model(w, b);
  model.iterations = params.epochs;
  model.objective_trace = std::move(trace);
  return model;
}

}  // namespace rulx
