#include "rulx/linear.hpp"

#include <cmath>

namespace rulx {
namespace {

double soft_threshold(double z, double gamma) {
  if (z > gamma) return z - gamma;
  if (z < -gamma) return z + gamma;
  return 0.0;
}

}  // namespace

void ElasticNetParams::validate() const {
  require(alpha >= 0.0 && std::isfinite(alpha), "alpha must be non-negative");
  require(l1_ratio >= 0.0 && l1_ratio <= 1.0, "l1_ratio must lie in [0, 1]");
  require(tol > 0.0, "tol must be positive");
}

double elastic_net_objective(const Matrix& x, const Vector& y, const Vector& w, double b, const ElasticNetParams& p) {
  const double n = static_cast<double>(y.size());
  const double fit = ((y - x * w).array() - b).square().sum() / (2.0 * n);
  return fit + p.alpha * (p.l1_ratio * w.lpNorm<1>() + 0.5 * (1.0 - p.l1_ratio) * w.squaredNorm());
}

LinearModel fit_elastic_net(const Matrix& x, const Vector& y, const ElasticNetParams& params) {
  params.validate();
  if (x.rows() == 0) fail(ErrorKind::training, "cannot fit elastic net on an empty training set");
  require(x.rows() == y.size(), "feature and target row counts differ");

  const double n = static_cast<double>(x.rows());
  const Eigen::RowVectorXd x_mean = params.fit_intercept ? Eigen::RowVectorXd(x.colwise().mean())
                                                         : Eigen::RowVectorXd::Zero(x.cols());
  const double y_mean = params.fit_intercept ? y.mean() : 0.0;
  const Matrix xc = x.rowwise() - x_mean;
  const Vector yc = y.array() - y_mean;

  const Vector col_sq = xc.colwise().squaredNorm().transpose() / n;
  const double l1 = params.alpha * params.l1_ratio;
  const double l2 = params.alpha * (1.0 - params.l1_ratio);

  Vector w = Vector::Zero(x.cols());
  Vector residual = yc;
  auto intercept = [&] { return y_mean - x_mean.dot(w); };

  std::vector<double> trace;
  trace.push_back(elastic_net_objective(x, y, w, intercept(), params));
  bool converged = false;
  std::size_t sweep = 0;
  while (sweep < params.max_iter) {
    ++sweep;
    double max_change = 0.0;
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      const double denom = col_sq(j) + l2;
      const double old = w(j);
      double updated = 0.0;
      if (denom > 0.0) {
        const double rho = xc.col(j).dot(residual) / n + col_sq(j) * old;
        updated = soft_threshold(rho, l1) / denom;
      }
      if (updated != old) {
        residual -= xc.col(j) * (updated - old);
        w(j) = updated;
        max_change = std::max(max_change, std::abs(updated - old));
      }
    }
    trace.push_back(elastic_net_objective(x, y, w, intercept(), params));
    if (max_change < params.tol) {
      converged = true;
      break;
    }
  }

  LinearModel model(w, intercept());
  model.converged = converged;
  model.iterations = sweep;
  model.objective_trace = std::move(trace);
  return model;
}

}  // namespace rulx
