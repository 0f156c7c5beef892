#pragma once

#include "rulx/data.hpp"
#include "rulx/forest.hpp"
#include "rulx/gbm.hpp"
#include "rulx/linear.hpp"
#include "rulx/mlp.hpp"

#include <json.hpp>

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace rulx {

enum class Family { random_forest, elastic_net, gradient_boosting, svr, mlp };

const std::vector<Family>& all_families();
/// Short tags: rf, enet, gbm, svr, mlp.
std::string family_tag(Family family);
/// Accepts the short tags plus common aliases (forest, elasticnet, svm, ...).
Family parse_family(std::string_view name);

using FamilyParams = std::variant<ForestParams, ElasticNetParams, GbmParams, SvrParams, MlpParams>;

FamilyParams default_params(Family family);
Family family_of(const FamilyParams& params);
void validate(const FamilyParams& params);

/// Sets a numeric hyperparameter by name; unknown names and non-integral
/// values for integer fields are rejected.
void set_param(FamilyParams& params, std::string_view name, double value);
std::vector<std::string> param_names(Family family);
void set_seed(FamilyParams& params, std::uint64_t seed);

std::shared_ptr<const Predictor> fit_model(const FamilyParams& params, const Matrix& x, const Vector& y);

nlohmann::json params_to_json(const FamilyParams& params);
FamilyParams params_from_json(Family family, const nlohmann::json& j);

nlohmann::json scaler_to_json(const Scaler& s);
Scaler scaler_from_json(const nlohmann::json& j);

/// A fitted predictor plus the preprocessing needed to feed it raw 24-feature rows.
struct TrainedModel {
  Family family = Family::random_forest;
  FamilyParams params;
  std::shared_ptr<const Predictor> predictor;
  std::optional<Scaler> scaler;
  Mask mask = Mask(kFeatures, true);

  std::vector<std::size_t> kept_columns() const;
  std::vector<std::string> kept_names() const;

  /// Scales (when a scaler is present) and masks raw rows.
  Matrix prepare(const Matrix& raw) const;
  double predict_raw(const Vector& raw) const;
  Vector predict_raw(const Dataset& ds) const;

  /// Opaque predictor over the kept features in original units.
  std::shared_ptr<const Predictor> unscaled_predictor() const;
};

inline constexpr int kModelFormatVersion = 1;
inline constexpr std::string_view kModelFormatName = "rul-explain-model";

nlohmann::json model_to_json(const TrainedModel& model);
TrainedModel model_from_json(const nlohmann::json& j);
void save_model(const TrainedModel& model, const std::string& path);
TrainedModel load_model(const std::string& path);

}  // namespace rulx
