#pragma once

#include "rulx/data.hpp"
#include "rulx/metrics.hpp"
#include "rulx/model.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace rulx {

struct SelectionRule {
  enum class Kind { top_k, threshold, none };
  Kind kind = Kind::threshold;
  /// k for top_k; minimum importance for threshold.
  double value = 0.005;

  static SelectionRule top_k(std::size_t k) { return {Kind::top_k, static_cast<double>(k)}; }
  static SelectionRule threshold(double t) { return {Kind::threshold, t}; }
  static SelectionRule keep_all() { return {Kind::none, 0.0}; }

  std::string describe() const;
};

SelectionRule parse_selection_rule(const std::string& kind, double value);

struct FeatureSelection {
  /// All 24 features, most important first (ties by column order).
  std::vector<std::pair<std::string, double>> ranking;
  Vector importance;
  Mask constant;
  Mask mask;
  SelectionRule rule;
  /// The ranking forest never split; importances are all zero.
  bool degenerate = false;

  std::size_t kept() const;
};

/// Fits a shallow forest on raw train features and applies the rule. Constant
/// features are always dropped; a rule that keeps nothing is an error.
FeatureSelection rank_and_select(const Dataset& train, const ForestParams& shallow, const SelectionRule& rule);
FeatureSelection apply_rule(Vector importance, Mask constant, bool degenerate, const SelectionRule& rule);

struct GridAxis {
  std::string name;
  std::vector<double> values;
};

struct GridSpec {
  /// Family and the settings not being searched.
  FamilyParams base;
  std::vector<GridAxis> axes;
  std::size_t cv_folds = 3;
  std::uint64_t seed = 0;
};

struct GridEntry {
  std::vector<std::pair<std::string, double>> values;
  std::vector<double> fold_mse;
  /// +inf when the combination failed to train.
  double mean_mse = 0.0;
  bool failed = false;
  std::string error;
};

struct GridResult {
  Family family = Family::random_forest;
  /// Every combination in enumeration order (last axis varies fastest).
  std::vector<GridEntry> table;
  std::size_t best = 0;
  FamilyParams chosen;
  std::shared_ptr<const Predictor> model;
};

std::size_t grid_size(const GridSpec& spec);

/// K-fold cross-validated search. Fold assignment is drawn once from spec.seed;
/// the winner (lowest mean MSE, earliest on ties) is refit on all rows.
GridResult grid_search(const Matrix& x, const Vector& y, const GridSpec& spec);
/// Convenience form on raw features of a labeled dataset.
GridResult grid_search(const Dataset& train, const GridSpec& spec);

nlohmann::json grid_to_json(const GridResult& result);
std::string grid_to_csv(const GridResult& result);

struct FamilyConfig {
  FamilyParams params;
  /// Non-empty: grid search over these axes around `params`.
  std::vector<GridAxis> grid;
};

struct ExperimentConfig {
  std::vector<FamilyConfig> families;
  bool scale = true;
  SelectionRule selection;
  ForestParams ranking_forest;
  std::size_t cv_folds = 3;
  std::uint64_t seed = 42;
};

struct ModelReport {
  Family family = Family::random_forest;
  FamilyParams params;
  double mse = 0.0;
  double mae = 0.0;
  double fit_seconds = 0.0;
  std::optional<GridResult> grid;
  TrainedModel model;
};

struct ExperimentReport {
  std::string train_provenance;
  std::string test_provenance;
  std::size_t n_train = 0;
  std::size_t n_test = 0;
  std::uint64_t seed = 0;
  std::vector<std::pair<std::string, std::uint64_t>> stage_seeds;
  std::optional<Scaler> scaler;
  FeatureSelection selection;
  std::vector<ModelReport> models;
  std::vector<std::string> warnings;
  std::vector<std::pair<std::string, double>> timings;
};

/// Fits scaling and feature selection on train only, trains every configured
/// family, and scores each on test. Stage failures are rethrown tagged with the stage.
ExperimentReport run_experiment(const Dataset& train, const Dataset& test, const ExperimentConfig& config);

/// Timing fields are omitted when include_timings is false, which makes the
/// document a pure function of inputs and seeds.
nlohmann::json report_to_json(const ExperimentReport& report, bool include_timings = true);

}  // namespace rulx
