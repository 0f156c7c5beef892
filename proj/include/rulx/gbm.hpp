#pragma once

#include "rulx/tree.hpp"

#include <cstdint>
#include <vector>

namespace rulx {

struct GbmParams {
  std::size_t n_stages = 100;
  double learning_rate = 0.1;
  int max_depth = 3;
  std::size_t min_samples_leaf = 10;
  std::size_t min_samples_split = 2;
  std::size_t max_features = 0;
  std::uint64_t seed = 0;

  TreeParams tree() const { return {max_depth, min_samples_leaf, min_samples_split, max_features}; }
  void validate() const;
};

/// Squared-error gradient boosting: F_0 = mean(y), F_m = F_{m-1} + rate * tree_m.
class GradientBoosting final : public Predictor {
 public:
  GradientBoosting() = default;
  GradientBoosting(std::size_t arity, double base, double learning_rate, std::vector<RegressionTree> stages);

  std::size_t arity() const override { return arity_; }
  double base() const { return base_; }
  double learning_rate() const { return learning_rate_; }
  const std::vector<RegressionTree>& stages() const { return stages_; }

  /// Training MSE after each stage, index 0 being the constant model. Empty after load.
  const std::vector<double>& training_loss() const { return training_loss_; }

 protected:
  double predict_row(const Eigen::Ref<const Vector>& x) const override;

 private:
  friend GradientBoosting fit_gbm(const Matrix&, const Vector&, const GbmParams&);

  std::size_t arity_ = 0;
  double base_ = 0.0;
  double learning_rate_ = 0.1;
  std::vector<RegressionTree> stages_;
  std::vector<double> training_loss_;
};

GradientBoosting fit_gbm(const Matrix& x, const Vector& y, const GbmParams& params);

}  // namespace rulx
