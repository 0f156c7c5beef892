#include "rulx/explain.hpp"
#include "rulx/random.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

namespace rulx {

using nlohmann::json;

std::string method_tag(ExplainMethod method) {
  switch (method) {
    case ExplainMethod::lime: return "lime";
    case ExplainMethod::kernel_shap: return "kernel_shap";
    case ExplainMethod::exact_shapley: return "exact_shapley";
  }
  return "unknown";
}

ExplainMethod parse_method(std::string_view name) {
  if (name == "lime") return ExplainMethod::lime;
  if (name == "shap" || name == "kernel_shap") return ExplainMethod::kernel_shap;
  if (name == "exact" || name == "exact_shapley") return ExplainMethod::exact_shapley;
  fail(ErrorKind::invalid_argument, "unknown explanation method '" + std::string(name) + "' (expected lime, shap, exact)");
}

double Explanation::total_contribution() const {
  double sum = 0.0;
  for (const auto& c : contributions) sum += c.value;
  return sum;
}

std::string format_value(double v) {
  if (v == 0.0) return "0";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

json to_json(const Explanation& e) {
  json contributions = json::array();
  for (const auto& c : e.contributions) {
    contributions.push_back({{"feature", c.feature},
                             {"condition", c.condition},
                             {"value", c.value},
                             {"feature_value", c.feature_value},
                             {"index", c.index}});
  }
  json diagnostics = {{"n_evaluations", e.n_evaluations}};
  if (e.method == ExplainMethod::lime) {
    diagnostics["intercept"] = e.intercept;
    diagnostics["r2_defined"] = e.r2_defined;
    diagnostics["weighted_r2"] = e.r2_defined ? json(e.r2) : json(nullptr);
  } else {
    diagnostics["local_accuracy_residual"] = e.local_accuracy_residual;
    diagnostics["sampled_coalitions"] = e.sampled;
  }
  return {{"method", method_tag(e.method)},
          {"base_value", e.base_value},
          {"predicted_value", e.predicted_value},
          {"contributions", contributions},
          {"diagnostics", diagnostics},
          {"metadata", e.metadata}};
}

Explanation explanation_from_json(const json& j) {
  Explanation e;
  e.method = parse_method(j.at("method").get<std::string>());
  e.base_value = j.at("base_value").get<double>();
  e.predicted_value = j.at("predicted_value").get<double>();
  for (const auto& c : j.at("contributions")) {
    e.contributions.push_back({c.at("feature").get<std::string>(), c.at("condition").get<std::string>(),
                               c.at("value").get<double>(), c.value("feature_value", 0.0),
                               c.value("index", std::size_t{0})});
  }
  const auto& d = j.at("diagnostics");
  e.n_evaluations = d.value("n_evaluations", std::size_t{0});
  if (e.method == ExplainMethod::lime) {
    e.intercept = d.value("intercept", 0.0);
    e.r2_defined = d.value("r2_defined", false);
    if (e.r2_defined) e.r2 = d.at("weighted_r2").get<double>();
  } else {
    e.local_accuracy_residual = d.value("local_accuracy_residual", 0.0);
    e.sampled = d.value("sampled_coalitions", false);
  }
  e.metadata = j.value("metadata", json::object());
  return e;
}

Matrix sample_background(const Matrix& data, std::size_t n, std::uint64_t seed) {
  const auto rows = static_cast<std::size_t>(data.rows());
  if (rows == 0) fail(ErrorKind::invalid_argument, "background data is empty");
  if (n >= rows) return data;
  std::vector<std::size_t> idx(rows);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  Rng rng(derive_seed(seed, "background"));
  for (std::size_t i = 0; i < n; ++i) std::swap(idx[i], idx[i + uniform_index(rng, rows - i)]);
  idx.resize(n);
  std::sort(idx.begin(), idx.end());
  Matrix out(static_cast<Eigen::Index>(n), data.cols());
  for (std::size_t i = 0; i < n; ++i) out.row(i) = data.row(idx[i]);
  return out;
}

}  // namespace rulx
