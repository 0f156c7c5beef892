#pragma once

#include "rulx/tree.hpp"

#include <cstdint>
#include <vector>

namespace rulx {

struct ForestParams {
  std::size_t n_estimators = 10;
  int max_depth = 9;
  std::size_t min_samples_leaf = 10;
  std::size_t min_samples_split = 2;
  /// 0 = consider every feature at each split.
  std::size_t max_features = 0;
  bool bootstrap = true;
  std::uint64_t seed = 0;

  TreeParams tree() const { return {max_depth, min_samples_leaf, min_samples_split, max_features}; }
  void validate() const;
};

class RandomForest final : public Predictor {
 public:
  RandomForest() = default;
  RandomForest(std::size_t arity, std::vector<RegressionTree> trees);

  std::size_t arity() const override { return arity_; }
  const std::vector<RegressionTree>& trees() const { return trees_; }

 protected:
  double predict_row(const Eigen::Ref<const Vector>& x) const override;

 private:
  std::size_t arity_ = 0;
  std::vector<RegressionTree> trees_;
};

/// Trees are trained in parallel; each tree's seed is derived from params.seed
/// and its index, so the forest does not depend on the thread count.
RandomForest fit_forest(const Matrix& x, const Vector& y, const ForestParams& params);

struct FeatureImportance {
  Vector values;
  /// Set when no tree split at all; values are then all zero and not normalized.
  bool degenerate = false;
};

/// Mean decrease in impurity, averaged over trees and normalized to sum to 1.
FeatureImportance feature_importance(const RandomForest& forest);

}  // namespace rulx
