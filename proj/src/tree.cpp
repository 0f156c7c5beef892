#include "rulx/tree.hpp"

#include "rulx/random.hpp"

#include <algorithm>
#include <numeric>

namespace rulx {
namespace {

struct Candidate {
  int feature = -1;
  double threshold = 0.0;
  double gain = 0.0;
};

class TreeBuilder {
 public:
  TreeBuilder(const Matrix& x, const Vector& y, const TreeParams& params, std::uint64_t seed)
      : x_(x), y_(y), params_(params), rng_(seed) {}

  std::vector<TreeNode> build(std::vector<std::size_t> rows) {
    grow(rows, 0);
    return std::move(nodes_);
  }

 private:
  int grow(std::vector<std::size_t>& rows, int depth) {
    const std::size_t n = rows.size();

    // Summation runs over sorted targets so the node statistics depend only on the multiset of rows.
    std::vector<double> targets(n);
    for (std::size_t i = 0; i < n; ++i) targets[i] = y_(rows[i]);
    std::sort(targets.begin(), targets.end());
    const double lo = targets.front();
    const double hi = targets.back();
    double sum = 0.0;
    for (double t : targets) sum += t;
    double mean = sum / static_cast<double>(n);
    mean = lo == hi ? lo : std::clamp(mean, lo, hi);

    const int index = static_cast<int>(nodes_.size());
    TreeNode leaf;
    leaf.value = mean;
    leaf.samples = n;
    nodes_.push_back(leaf);

    if (depth >= params_.max_depth || n < params_.min_samples_split || n < 2 * params_.min_samples_leaf || lo == hi)
      return index;

    double sse = 0.0;
    for (double t : targets) sse += (t - mean) * (t - mean);

    const Candidate best = best_split(rows, mean, sse);
    if (best.feature < 0) return index;

    std::vector<std::size_t> left, right;
    left.reserve(n);
    right.reserve(n);
    for (std::size_t r : rows) (x_(r, best.feature) <= best.threshold ? left : right).push_back(r);
    rows.clear();
    rows.shrink_to_fit();

    nodes_[index].feature = best.feature;
    nodes_[index].threshold = best.threshold;
    nodes_[index].sse_reduction = best.gain;
    const int l = grow(left, depth + 1);
    const int r = grow(right, depth + 1);
    nodes_[index].left = l;
    nodes_[index].right = r;
    return index;
  }

  std::vector<int> candidate_features() {
    const auto p = static_cast<std::size_t>(x_.cols());
    std::vector<int> features(p);
    std::iota(features.begin(), features.end(), 0);
    if (params_.max_features == 0 || params_.max_features >= p) return features;
    for (std::size_t i = 0; i < params_.max_features; ++i)
      std::swap(features[i], features[i + uniform_index(rng_, p - i)]);
    features.resize(params_.max_features);
    std::sort(features.begin(), features.end());
    return features;
  }

  Candidate best_split(const std::vector<std::size_t>& rows, double mean, double sse) {
    const std::size_t n = rows.size();
    const std::size_t min_leaf = std::max<std::size_t>(1, params_.min_samples_leaf);
    const double min_gain = 1e-10 * sse;
    Candidate best;
    best.gain = min_gain;

    std::vector<std::pair<double, double>> column(n);
    for (int f : candidate_features()) {
      for (std::size_t i = 0; i < n; ++i) column[i] = {x_(rows[i], f), y_(rows[i]) - mean};
      std::sort(column.begin(), column.end());
      if (column.front().first == column.back().first) continue;

      double total = 0.0;
      for (const auto& c : column) total += c.second;
      const double base = total * total / static_cast<double>(n);

      double left_sum = 0.0;
      for (std::size_t i = 1; i < n; ++i) {
        left_sum += column[i - 1].second;
        if (i < min_leaf || n - i < min_leaf) continue;
        if (!(column[i - 1].first < column[i].first)) continue;
        const double nl = static_cast<double>(i);
        const double nr = static_cast<double>(n - i);
        const double right_sum = total - left_sum;
        const double gain = left_sum * left_sum / nl + right_sum * right_sum / nr - base;
        if (gain > best.gain) {
          double threshold = 0.5 * (column[i - 1].first + column[i].first);
          if (!(threshold < column[i].first)) threshold = column[i - 1].first;
          best = {f, threshold, gain};
        }
      }
    }
    return best;
  }

  const Matrix& x_;
  const Vector& y_;
  TreeParams params_;
  Rng rng_;
  std::vector<TreeNode> nodes_;
};

}  // namespace

void TreeParams::validate() const {
  require(max_depth >= 0, "max_depth must be non-negative");
  require(min_samples_leaf >= 1, "min_samples_leaf must be positive");
  require(min_samples_split >= 2, "min_samples_split must be at least 2");
}

RegressionTree::RegressionTree(std::size_t arity, std::vector<TreeNode> nodes) : arity_(arity), nodes_(std::move(nodes)) {
  require(!nodes_.empty(), "a tree needs at least one node");
  const int count = static_cast<int>(nodes_.size());
  for (const auto& node : nodes_) {
    if (node.is_leaf()) continue;
    require(node.feature < static_cast<int>(arity_), "tree split feature out of range");
    require(node.left > 0 && node.left < count && node.right > 0 && node.right < count, "tree child index out of range");
  }
}

double RegressionTree::predict_row(const Eigen::Ref<const Vector>& x) const {
  const TreeNode* node = &nodes_.front();
  while (!node->is_leaf()) node = &nodes_[x(node->feature) <= node->threshold ? node->left : node->right];
  return node->value;
}

std::size_t RegressionTree::depth() const {
  std::vector<std::size_t> level(nodes_.size(), 0);
  std::size_t deepest = 0;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    deepest = std::max(deepest, level[i]);
    if (!nodes_[i].is_leaf()) {
      level[nodes_[i].left] = level[i] + 1;
      level[nodes_[i].right] = level[i] + 1;
    }
  }
  return deepest;
}

std::size_t RegressionTree::leaf_count() const {
  return static_cast<std::size_t>(std::count_if(nodes_.begin(), nodes_.end(), [](const auto& n) { return n.is_leaf(); }));
}

Vector RegressionTree::impurity_decrease() const {
  Vector total = Vector::Zero(static_cast<Eigen::Index>(arity_));
  if (nodes_.empty() || nodes_.front().samples == 0) return total;
  for (const auto& node : nodes_)
    if (!node.is_leaf()) total(node.feature) += node.sse_reduction;
  return total / static_cast<double>(nodes_.front().samples);
}

RegressionTree fit_tree(const Matrix& x, const Vector& y, const std::vector<std::size_t>& rows, const TreeParams& params,
                        std::uint64_t feature_subset_seed) {
  params.validate();
  if (rows.empty() || x.rows() == 0) fail(ErrorKind::training, "cannot fit a tree on an empty training set");
  require(x.rows() == y.size(), "feature and target row counts differ");
  for (std::size_t r : rows) require(r < static_cast<std::size_t>(x.rows()), "training row index out of range");
  require(y.allFinite() && x.allFinite(), "training data must be finite");
  TreeBuilder builder(x, y, params, feature_subset_seed);
  return RegressionTree(static_cast<std::size_t>(x.cols()), builder.build(rows));
}

RegressionTree fit_tree(const Matrix& x, const Vector& y, const TreeParams& params, std::uint64_t feature_subset_seed) {
  std::vector<std::size_t> rows(static_cast<std::size_t>(x.rows()));
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  return fit_tree(x, y, rows, params, feature_subset_seed);
}

}  // namespace rulx
