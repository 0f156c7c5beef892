#include "rulx/explain.hpp"
#include "rulx/random.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace rulx {
namespace {

double midpoint_quantile(const std::vector<double>& sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = static_cast<std::size_t>(std::ceil(pos));
  return 0.5 * (sorted[lo] + sorted[hi]);
}

std::size_t bin_of(const std::vector<double>& edges, double v) {
  return static_cast<std::size_t>(std::lower_bound(edges.begin(), edges.end(), v) - edges.begin());
}

std::string bin_condition(const std::string& name, const std::vector<double>& edges, std::size_t bin) {
  if (bin == 0) return name + " <= " + format_value(edges.front());
  if (bin == edges.size()) return name + " > " + format_value(edges.back());
  return format_value(edges[bin - 1]) + " < " + name + " <= " + format_value(edges[bin]);
}

struct WeightedRidge {
  Vector coef;
  double intercept = 0.0;
};

/// argmin sum_i w_i (y_i - b - z_i.beta)^2 + ridge |beta|^2, intercept unpenalized.
WeightedRidge weighted_ridge(const Matrix& z, const Vector& y, const Vector& w, double ridge) {
  const double wsum = w.sum();
  const Eigen::RowVectorXd z_mean = (w.transpose() * z) / wsum;
  const double y_mean = w.dot(y) / wsum;
  const Matrix zc = z.rowwise() - z_mean;
  const Vector yc = y.array() - y_mean;
  Matrix gram = zc.transpose() * w.asDiagonal() * zc;
  gram.diagonal().array() += ridge;
  WeightedRidge fit;
  fit.coef = gram.ldlt().solve(zc.transpose() * w.asDiagonal() * yc);
  fit.intercept = y_mean - z_mean.dot(fit.coef);
  return fit;
}

}  // namespace

std::vector<std::vector<double>> quartile_edges(const Matrix& background) {
  if (background.rows() == 0) fail(ErrorKind::invalid_argument, "background data is empty");
  std::vector<std::vector<double>> edges(static_cast<std::size_t>(background.cols()));
  std::vector<double> column(static_cast<std::size_t>(background.rows()));
  for (Eigen::Index j = 0; j < background.cols(); ++j) {
    for (Eigen::Index i = 0; i < background.rows(); ++i) column[i] = background(i, j);
    std::sort(column.begin(), column.end());
    auto& e = edges[j];
    for (double q : {0.25, 0.5, 0.75}) e.push_back(midpoint_quantile(column, q));
    e.erase(std::unique(e.begin(), e.end()), e.end());
  }
  return edges;
}

Explanation lime_explain(const Predictor& model, const Vector& instance, const Matrix& background,
                         const LimeOptions& options) {
  const std::size_t m = model.arity();
  require(static_cast<std::size_t>(instance.size()) == m, "instance arity does not match the model");
  if (background.rows() == 0) fail(ErrorKind::invalid_argument, "background data is empty");
  require(static_cast<std::size_t>(background.cols()) == m, "background arity does not match the model");
  if (options.n_samples < 100) fail(ErrorKind::invalid_argument, "LIME needs at least 100 samples");
  require(options.k_features >= 1 && options.k_features <= m, "k_features must lie in [1, feature count]");
  require(options.ridge >= 0.0, "ridge strength must be non-negative");

  std::vector<std::string> names = options.feature_names;
  if (names.empty())
    for (std::size_t j = 0; j < m; ++j) names.push_back("x" + std::to_string(j));
  require(names.size() == m, "feature name count does not match the instance");

  // Background values grouped by quartile bin; only non-empty bins take part.
  const auto edges = quartile_edges(background);
  std::vector<std::vector<std::vector<double>>> members(m);
  std::vector<std::size_t> own_bin(m);
  std::vector<std::vector<std::size_t>> other_bins(m);
  bool any_variation = false;
  for (std::size_t j = 0; j < m; ++j) {
    members[j].resize(edges[j].size() + 1);
    for (Eigen::Index i = 0; i < background.rows(); ++i)
      members[j][bin_of(edges[j], background(i, j))].push_back(background(i, j));
    own_bin[j] = bin_of(edges[j], instance(j));
    for (std::size_t b = 0; b < members[j].size(); ++b)
      if (b != own_bin[j] && !members[j][b].empty()) other_bins[j].push_back(b);
    any_variation = any_variation || background.col(j).maxCoeff() > background.col(j).minCoeff();
  }
  if (!any_variation) fail(ErrorKind::invalid_argument, "degenerate background: every feature is constant");

  const auto n = static_cast<Eigen::Index>(options.n_samples);
  Matrix presence = Matrix::Ones(n, static_cast<Eigen::Index>(m));
  Matrix perturbed = instance.transpose().replicate(n, 1);
  Rng rng(derive_seed(options.seed, "lime"));
  std::bernoulli_distribution keep(0.5);
  for (Eigen::Index i = 1; i < n; ++i) {  // row 0 is the instance itself
    for (std::size_t j = 0; j < m; ++j) {
      if (keep(rng)) continue;
      presence(i, j) = 0.0;
      if (other_bins[j].empty()) continue;
      const auto& pool = members[j][other_bins[j][uniform_index(rng, other_bins[j].size())]];
      perturbed(i, j) = pool[uniform_index(rng, pool.size())];
    }
  }

  const Vector outputs = model.predict_batch(perturbed);
  const double width = options.kernel_width > 0.0 ? options.kernel_width : 0.75 * std::sqrt(static_cast<double>(m));
  const Vector dropped = static_cast<double>(m) - presence.rowwise().sum().array();
  const Vector weights = (-dropped.array() / (width * width)).exp();

  const WeightedRidge prelim = weighted_ridge(presence, outputs, weights, options.ridge);
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return std::abs(prelim.coef(a)) > std::abs(prelim.coef(b)); });
  std::vector<std::size_t> selected(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(options.k_features));
  std::sort(selected.begin(), selected.end());

  Matrix z(n, static_cast<Eigen::Index>(selected.size()));
  for (std::size_t c = 0; c < selected.size(); ++c) z.col(c) = presence.col(selected[c]);
  const WeightedRidge fit = weighted_ridge(z, outputs, weights, options.ridge);

  Explanation e;
  e.method = ExplainMethod::lime;
  e.predicted_value = outputs(0);
  e.base_value = model.predict_batch(background).mean();
  e.intercept = fit.intercept;
  e.n_evaluations = options.n_samples + static_cast<std::size_t>(background.rows());

  const double y_mean = weights.dot(outputs) / weights.sum();
  const double total_ss = weights.dot((outputs.array() - y_mean).square().matrix());
  const Vector fitted = (z * fit.coef).array() + fit.intercept;
  const double residual_ss = weights.dot((outputs - fitted).array().square().matrix());
  e.r2_defined = total_ss > 1e-12 * std::max(1.0, y_mean * y_mean) * weights.sum();
  if (e.r2_defined) e.r2 = 1.0 - residual_ss / total_ss;

  for (std::size_t c = 0; c < selected.size(); ++c) {
    const std::size_t j = selected[c];
    e.contributions.push_back({names[j], bin_condition(names[j], edges[j], own_bin[j]), fit.coef(c), instance(j), j});
  }
  std::stable_sort(e.contributions.begin(), e.contributions.end(), [](const Contribution& a, const Contribution& b) {
    const double fa = std::abs(a.value), fb = std::abs(b.value);
    if (fa != fb) return fa > fb;
    return a.index < b.index;
  });
  return e;
}

}  // namespace rulx
