#pragma once

#include "rulx/predictor.hpp"

#include <json.hpp>

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace rulx {

enum class ExplainMethod { lime, kernel_shap, exact_shapley };

std::string method_tag(ExplainMethod method);
ExplainMethod parse_method(std::string_view name);

struct Contribution {
  std::string feature;
  /// Human-readable condition in original units, e.g. "sensor-1 <= 518.67".
  std::string condition;
  double value = 0.0;
  double feature_value = 0.0;
  std::size_t index = 0;
};

struct Explanation {
  ExplainMethod method = ExplainMethod::kernel_shap;
  double predicted_value = 0.0;
  /// Mean model output over the background rows.
  double base_value = 0.0;
  /// Sorted by |value| descending, ties by feature index.
  std::vector<Contribution> contributions;

  // LIME: surrogate intercept and weighted R^2 (undefined when the model output does not vary).
  double intercept = 0.0;
  double r2 = std::numeric_limits<double>::quiet_NaN();
  bool r2_defined = false;
  // SHAP: |base + sum(phi) - f(x)| after the constrained solve.
  double local_accuracy_residual = 0.0;
  std::size_t n_evaluations = 0;
  bool sampled = false;

  /// Free-form provenance: row index, model family, actual RUL, ...
  nlohmann::json metadata = nlohmann::json::object();

  double total_contribution() const;
};

nlohmann::json to_json(const Explanation& e);
Explanation explanation_from_json(const nlohmann::json& j);

/// Formats a value in original units, up to 6 significant digits.
std::string format_value(double v);

/// Seeded subsample of at most n rows (all rows when n >= rows), kept in storage order.
Matrix sample_background(const Matrix& data, std::size_t n, std::uint64_t seed);

struct LimeOptions {
  std::size_t n_samples = 5000;
  std::size_t k_features = 8;
  std::uint64_t seed = 0;
  /// 0 selects 0.75 * sqrt(number of features).
  double kernel_width = 0.0;
  double ridge = 1e-3;
  std::vector<std::string> feature_names;
};

/// Tabular LIME over quartile-discretized features.
Explanation lime_explain(const Predictor& model, const Vector& instance, const Matrix& background,
                         const LimeOptions& options);

/// Quartile edges (midpoint interpolation) of each background column, duplicates removed.
std::vector<std::vector<double>> quartile_edges(const Matrix& background);

struct KernelShapOptions {
  std::size_t n_coalitions = 2048;
  std::uint64_t seed = 0;
  /// Coalitions are fully enumerated when the feature count is at most this.
  std::size_t max_enumerated_features = 12;
  std::vector<std::string> feature_names;
};

/// Kernel SHAP with interventional (background replacement) coalition values.
Explanation kernel_shap(const Predictor& model, const Vector& instance, const Matrix& background,
                        const KernelShapOptions& options);

inline constexpr std::size_t kMaxExactShapleyFeatures = 12;

/// Shapley values by explicit enumeration over the players in `features` (all
/// features when empty). Non-player features stay at the instance's values.
Explanation exact_shapley(const Predictor& model, const Vector& instance, const Matrix& background,
                          const std::vector<std::size_t>& features = {},
                          const std::vector<std::string>& feature_names = {});

enum class RenderStyle { bar, force, text };

RenderStyle parse_style(std::string_view name);

struct ForceArrow {
  std::size_t contribution = 0;
  double from = 0.0;  // in output units
  double to = 0.0;
  double length_px = 0.0;
  bool increases = true;
};

struct ForceLayout {
  double axis_min = 0.0;
  double axis_max = 0.0;
  double px_per_unit = 0.0;
  std::vector<ForceArrow> arrows;
};

/// Arrows start at the base value; increases are stacked first, then decreases,
/// ending at the predicted value. Zero contributions get no arrow.
ForceLayout layout_force(const Explanation& e, double width_px);

/// SVG for bar and force styles, plain text for the text style.
std::string render_explanation(const Explanation& e, RenderStyle style);

}  // namespace rulx
