#include "rulx/gbm.hpp"

#include "rulx/random.hpp"

namespace rulx {

void GbmParams::validate() const {
  require(learning_rate > 0.0 && learning_rate <= 1.0, "learning_rate must lie in (0, 1]");
  tree().validate();
}

GradientBoosting::GradientBoosting(std::size_t arity, double base, double learning_rate, std::vector<RegressionTree> stages)
    : arity_(arity), base_(base), learning_rate_(learning_rate), stages_(std::move(stages)) {
  for (const auto& t : stages_) require(t.arity() == arity_, "boosting stages disagree on arity");
}

double GradientBoosting::predict_row(const Eigen::Ref<const Vector>& x) const {
  double f = base_;
  for (const auto& t : stages_) f += learning_rate_ * t.predict(x);
  return f;
}

GradientBoosting fit_gbm(const Matrix& x, const Vector& y, const GbmParams& params) {
  params.validate();
  if (x.rows() == 0) fail(ErrorKind::training, "cannot fit boosting on an empty training set");
  require(x.rows() == y.size(), "feature and target row counts differ");

  GradientBoosting model;
  model.arity_ = static_cast<std::size_t>(x.cols());
  model.learning_rate_ = params.learning_rate;
  model.base_ = y.mean();
  model.stages_.reserve(params.n_stages);

  Vector fitted = Vector::Constant(y.size(), model.base_);
  Vector residual = y - fitted;
  model.training_loss_.push_back(residual.squaredNorm() / static_cast<double>(y.size()));
  for (std::size_t m = 0; m < params.n_stages; ++m) {
    RegressionTree tree = fit_tree(x, residual, params.tree(), derive_seed(params.seed, m));
    fitted += params.learning_rate * tree.predict_batch(x);
    residual = y - fitted;
    model.training_loss_.push_back(residual.squaredNorm() / static_cast<double>(y.size()));
    model.stages_.push_back(std::move(tree));
  }
  return model;
}

}  // namespace rulx
