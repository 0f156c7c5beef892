#include "rulx/forest.hpp"

#include "rulx/parallel.hpp"
#include "rulx/random.hpp"

namespace rulx {

void ForestParams::validate() const {
  require(n_estimators >= 1, "n_estimators must be positive");
  tree().validate();
}

RandomForest::RandomForest(std::size_t arity, std::vector<RegressionTree> trees) : arity_(arity), trees_(std::move(trees)) {
  require(!trees_.empty(), "a forest needs at least one tree");
  for (const auto& t : trees_) require(t.arity() == arity_, "forest trees disagree on arity");
}

double RandomForest::predict_row(const Eigen::Ref<const Vector>& x) const {
  // Averaging offsets from the first tree keeps identical outputs exact.
  const double anchor = trees_.front().predict(x);
  double offset = 0.0;
  for (std::size_t t = 1; t < trees_.size(); ++t) offset += trees_[t].predict(x) - anchor;
  return anchor + offset / static_cast<double>(trees_.size());
}

RandomForest fit_forest(const Matrix& x, const Vector& y, const ForestParams& params) {
  params.validate();
  if (x.rows() == 0) fail(ErrorKind::training, "cannot fit a forest on an empty training set");
  require(x.rows() == y.size(), "feature and target row counts differ");

  const auto n = static_cast<std::size_t>(x.rows());
  std::vector<RegressionTree> trees(params.n_estimators);
  parallel_for(params.n_estimators, [&](std::size_t t) {
    const std::uint64_t tree_seed = derive_seed(params.seed, t);
    std::vector<std::size_t> rows(n);
    if (params.bootstrap) {
      Rng rng(derive_seed(tree_seed, "bootstrap"));
      for (auto& r : rows) r = uniform_index(rng, n);
    } else {
      for (std::size_t i = 0; i < n; ++i) rows[i] = i;
    }
    trees[t] = fit_tree(x, y, rows, params.tree(), derive_seed(tree_seed, "features"));
  });
  return RandomForest(static_cast<std::size_t>(x.cols()), std::move(trees));
}

FeatureImportance feature_importance(const RandomForest& forest) {
  FeatureImportance out;
  out.values = Vector::Zero(static_cast<Eigen::Index>(forest.arity()));
  for (const auto& t : forest.trees()) out.values += t.impurity_decrease();
  out.values /= static_cast<double>(forest.trees().size());
  const double total = out.values.sum();
  if (!(total > 0.0)) {
    out.values.setZero();
    out.degenerate = true;
    return out;
  }
  out.values /= total;
  return out;
}

}  // namespace rulx
