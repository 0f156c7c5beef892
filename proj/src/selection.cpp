#include "rulx/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

namespace rulx {

std::string SelectionRule::describe() const {
  char buf[64];
  switch (kind) {
    case Kind::top_k: std::snprintf(buf, sizeof(buf), "top_k(%.0f)", value); break;
    case Kind::threshold: std::snprintf(buf, sizeof(buf), "threshold(%g)", value); break;
    case Kind::none: std::snprintf(buf, sizeof(buf), "none"); break;
  }
  return buf;
}

SelectionRule parse_selection_rule(const std::string& kind, double value) {
  if (kind == "top_k" || kind == "topk") {
    require(value >= 1.0 && value == std::floor(value), "top_k needs a positive integer k");
    return SelectionRule::top_k(static_cast<std::size_t>(value));
  }
  if (kind == "threshold") {
    require(value >= 0.0 && std::isfinite(value), "importance threshold must be non-negative");
    return SelectionRule::threshold(value);
  }
  if (kind == "none") return SelectionRule::keep_all();
  fail(ErrorKind::invalid_argument, "unknown selection rule '" + kind + "' (expected top_k, threshold, none)");
}

std::size_t FeatureSelection::kept() const { return static_cast<std::size_t>(std::count(mask.begin(), mask.end(), true)); }

FeatureSelection apply_rule(Vector importance, Mask constant, bool degenerate, const SelectionRule& rule) {
  const auto p = static_cast<std::size_t>(importance.size());
  require(constant.size() == p, "constant mask size mismatch");
  FeatureSelection out;
  out.rule = rule;
  out.degenerate = degenerate;

  std::vector<std::size_t> order(p);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return importance(a) > importance(b); });
  const auto& names = feature_names();
  for (std::size_t j : order) out.ranking.emplace_back(p == kFeatures ? names[j] : "x" + std::to_string(j), importance(j));

  out.mask.assign(p, false);
  switch (rule.kind) {
    case SelectionRule::Kind::top_k: {
      const auto k = static_cast<std::size_t>(rule.value);
      std::size_t taken = 0;
      for (std::size_t j : order) {
        if (taken == k) break;
        if (constant[j]) continue;
        out.mask[j] = true;
        ++taken;
      }
      break;
    }
    case SelectionRule::Kind::threshold:
      for (std::size_t j = 0; j < p; ++j) out.mask[j] = !constant[j] && importance(j) > 0.0 && importance(j) >= rule.value;
      break;
    case SelectionRule::Kind::none:
      for (std::size_t j = 0; j < p; ++j) out.mask[j] = !constant[j];
      break;
  }
  out.importance = std::move(importance);
  out.constant = std::move(constant);
  if (out.kept() == 0) fail(ErrorKind::data, "feature selection rule " + rule.describe() + " drops every feature");
  return out;
}

FeatureSelection rank_and_select(const Dataset& train, const ForestParams& shallow, const SelectionRule& rule) {
  if (!train.labeled()) fail(ErrorKind::data, "feature ranking needs a labeled training set");
  const Matrix x = train.features();
  const Vector y = train.targets();
  Mask constant(kFeatures);
  for (std::size_t j = 0; j < kFeatures; ++j) constant[j] = x.col(j).maxCoeff() == x.col(j).minCoeff();
  const RandomForest forest = fit_forest(x, y, shallow);
  const FeatureImportance importance = feature_importance(forest);
  return apply_rule(importance.values, std::move(constant), importance.degenerate, rule);
}

}  // namespace rulx
