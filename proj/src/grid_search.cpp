#include "rulx/parallel.hpp"
#include "rulx/pipeline.hpp"
#include "rulx/random.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace rulx {

using nlohmann::json;

std::size_t grid_size(const GridSpec& spec) {
  std::size_t n = 1;
  for (const auto& axis : spec.axes) n *= axis.values.size();
  return n;
}

GridResult grid_search(const Matrix& x, const Vector& y, const GridSpec& spec) {
  require(spec.cv_folds >= 2, "grid search needs at least 2 folds");
  require(x.rows() == y.size(), "feature and target row counts differ");
  require(static_cast<std::size_t>(x.rows()) >= spec.cv_folds, "fewer rows than folds");
  for (const auto& axis : spec.axes) require(!axis.values.empty(), "grid axis '" + axis.name + "' has no values");

  const auto n = static_cast<std::size_t>(x.rows());
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(derive_seed(spec.seed, "folds"));
  for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[uniform_index(rng, i)]);
  std::vector<std::size_t> fold(n);
  for (std::size_t k = 0; k < n; ++k) fold[order[k]] = k % spec.cv_folds;

  struct Fold {
    Matrix x_train, x_val;
    Vector y_train, y_val;
  };
  std::vector<Fold> folds(spec.cv_folds);
  for (std::size_t f = 0; f < spec.cv_folds; ++f) {
    std::vector<std::size_t> tr, va;
    for (std::size_t i = 0; i < n; ++i) (fold[i] == f ? va : tr).push_back(i);
    folds[f].x_train = x(tr, Eigen::all);
    folds[f].y_train = y(tr);
    folds[f].x_val = x(va, Eigen::all);
    folds[f].y_val = y(va);
  }

  GridResult result;
  result.family = family_of(spec.base);
  const std::size_t combos = grid_size(spec);
  result.table.resize(combos);
  std::vector<FamilyParams> candidates(combos, spec.base);
  for (std::size_t c = 0; c < combos; ++c) {
    std::size_t rest = c;
    auto& entry = result.table[c];
    entry.values.resize(spec.axes.size());
    for (std::size_t a = spec.axes.size(); a-- > 0;) {
      const auto& axis = spec.axes[a];
      entry.values[a] = {axis.name, axis.values[rest % axis.values.size()]};
      rest /= axis.values.size();
    }
  }

  parallel_for(combos, [&](std::size_t c) {
    auto& entry = result.table[c];
    try {
      for (const auto& [name, value] : entry.values) set_param(candidates[c], name, value);
      validate(candidates[c]);
      for (const auto& f : folds) {
        const auto model = fit_model(candidates[c], f.x_train, f.y_train);
        const double score = mse(f.y_val, model->predict_batch(f.x_val));
        if (!std::isfinite(score)) fail(ErrorKind::training, "non-finite validation error");
        entry.fold_mse.push_back(score);
      }
      entry.mean_mse = std::accumulate(entry.fold_mse.begin(), entry.fold_mse.end(), 0.0) /
                       static_cast<double>(entry.fold_mse.size());
    } catch (const std::exception& e) {
      entry.failed = true;
      entry.error = e.what();
      entry.fold_mse.clear();
      entry.mean_mse = std::numeric_limits<double>::infinity();
    }
  });

  bool found = false;
  for (std::size_t c = 0; c < combos; ++c) {
    if (result.table[c].failed) continue;
    if (!found || result.table[c].mean_mse < result.table[result.best].mean_mse) result.best = c;
    found = true;
  }
  if (!found) fail(ErrorKind::training, "every grid combination failed: " + result.table.front().error);
  result.chosen = candidates[result.best];
  result.model = fit_model(result.chosen, x, y);
  return result;
}

GridResult grid_search(const Dataset& train, const GridSpec& spec) {
  return grid_search(train.features(), train.targets(), spec);
}

json grid_to_json(const GridResult& result) {
  json rows = json::array();
  for (const auto& e : result.table) {
    json values = json::object();
    for (const auto& [name, v] : e.values) values[name] = v;
    json row = {{"values", values}, {"fold_mse", e.fold_mse}, {"failed", e.failed}};
    row["mean_mse"] = e.failed ? json(nullptr) : json(e.mean_mse);
    if (e.failed) row["error"] = e.error;
    rows.push_back(row);
  }
  return {{"family", family_tag(result.family)},
          {"best_index", result.best},
          {"chosen", params_to_json(result.chosen)},
          {"table", rows}};
}

std::string grid_to_csv(const GridResult& result) {
  std::ostringstream out;
  out.precision(17);
  if (result.table.empty()) return {};
  for (const auto& [name, v] : result.table.front().values) out << name << ',';
  out << "mean_mse,failed,chosen\n";
  for (std::size_t c = 0; c < result.table.size(); ++c) {
    const auto& e = result.table[c];
    for (const auto& [name, v] : e.values) out << v << ',';
    if (e.failed) out << "inf";
    else out << e.mean_mse;
    out << ',' << (e.failed ? 1 : 0) << ',' << (c == result.best ? 1 : 0) << '\n';
  }
  return out.str();
}

}  // namespace rulx
