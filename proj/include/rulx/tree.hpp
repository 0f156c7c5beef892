#pragma once

#include "rulx/predictor.hpp"

#include <cstdint>
#include <vector>

namespace rulx {

struct TreeParams {
  int max_depth = 9;
  std::size_t min_samples_leaf = 10;
  std::size_t min_samples_split = 2;
  /// Features examined per split; 0 means all of them.
  std::size_t max_features = 0;

  void validate() const;
};

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;
  std::size_t samples = 0;
  /// Drop in summed squared error produced by this node's split.
  double sse_reduction = 0.0;

  bool is_leaf() const { return feature < 0; }
};

/// CART regression tree. x[feature] <= threshold goes left.
class RegressionTree final : public Predictor {
 public:
  RegressionTree() = default;
  RegressionTree(std::size_t arity, std::vector<TreeNode> nodes);

  std::size_t arity() const override { return arity_; }
  const std::vector<TreeNode>& nodes() const { return nodes_; }
  std::size_t depth() const;
  std::size_t leaf_count() const;

  /// Per-feature sum of sse_reduction divided by the root sample count.
  Vector impurity_decrease() const;

 protected:
  double predict_row(const Eigen::Ref<const Vector>& x) const override;

 private:
  std::size_t arity_ = 0;
  std::vector<TreeNode> nodes_;
};

RegressionTree fit_tree(const Matrix& x, const Vector& y, const TreeParams& params,
                        std::uint64_t feature_subset_seed = 0);

/// Fits on the multiset of rows named by `rows` (repeats allowed, as in a bootstrap draw).
/// The result depends only on that multiset, not on storage or draw order.
RegressionTree fit_tree(const Matrix& x, const Vector& y, const std::vector<std::size_t>& rows,
                        const TreeParams& params, std::uint64_t feature_subset_seed = 0);

}  // namespace rulx
