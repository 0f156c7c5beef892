#include "rulx/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

namespace rulx {

using nlohmann::json;

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::size_t as_count(std::string_view name, double v) {
  if (!(v >= 0.0) || v != std::floor(v) || v > 1e12)
    fail(ErrorKind::invalid_argument, "parameter '" + std::string(name) + "' must be a non-negative integer");
  return static_cast<std::size_t>(v);
}

bool as_flag(std::string_view name, double v) {
  if (v != 0.0 && v != 1.0) fail(ErrorKind::invalid_argument, "parameter '" + std::string(name) + "' must be 0 or 1");
  return v == 1.0;
}

[[noreturn]] void unknown_param(Family f, std::string_view name) {
  fail(ErrorKind::invalid_argument, "unknown " + family_tag(f) + " parameter '" + std::string(name) + "'");
}

json vec_to_json(const Vector& v) { return json(std::vector<double>(v.data(), v.data() + v.size())); }

Vector vec_from_json(const json& j) {
  const auto values = j.get<std::vector<double>>();
  return Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
}

json tree_to_json(const RegressionTree& tree) {
  json nodes = json::array();
  for (const auto& n : tree.nodes())
    nodes.push_back({n.feature, n.threshold, n.left, n.right, n.value, n.samples, n.sse_reduction});
  return {{"arity", tree.arity()}, {"nodes", nodes}};
}

RegressionTree tree_from_json(const json& j) {
  std::vector<TreeNode> nodes;
  for (const auto& n : j.at("nodes")) {
    if (!n.is_array() || n.size() != 7) fail(ErrorKind::model_io, "malformed tree node");
    TreeNode node;
    node.feature = n[0].get<int>();
    node.threshold = n[1].get<double>();
    node.left = n[2].get<int>();
    node.right = n[3].get<int>();
    node.value = n[4].get<double>();
    node.samples = n[5].get<std::size_t>();
    node.sse_reduction = n[6].get<double>();
    nodes.push_back(node);
  }
  return RegressionTree(j.at("arity").get<std::size_t>(), std::move(nodes));
}

json predictor_to_json(Family family, const Predictor& p) {
  switch (family) {
    case Family::random_forest: {
      const auto& forest = dynamic_cast<const RandomForest&>(p);
      json trees = json::array();
      for (const auto& t : forest.trees()) trees.push_back(tree_to_json(t));
      return {{"arity", forest.arity()}, {"trees", trees}};
    }
    case Family::gradient_boosting: {
      const auto& gbm = dynamic_cast<const GradientBoosting&>(p);
      json stages = json::array();
      for (const auto& t : gbm.stages()) stages.push_back(tree_to_json(t));
      return {{"arity", gbm.arity()}, {"base", gbm.base()}, {"learning_rate", gbm.learning_rate()}, {"stages", stages}};
    }
    case Family::elastic_net:
    case Family::svr: {
      const auto& lin = dynamic_cast<const LinearModel&>(p);
      return {{"weights", vec_to_json(lin.weights())},
              {"intercept", lin.intercept()},
              {"converged", lin.converged},
              {"iterations", lin.iterations}};
    }
    case Family::mlp: {
      const auto& mlp = dynamic_cast<const Mlp&>(p);
      json layers = json::array();
      for (const auto& l : mlp.layers()) {
        const Vector w = l.weights.reshaped();
        layers.push_back({{"rows", l.weights.rows()}, {"cols", l.weights.cols()}, {"weights", vec_to_json(w)},
                          {"bias", vec_to_json(l.bias)}});
      }
      return {{"layers", layers}, {"target_mean", mlp.target_mean()}, {"target_scale", mlp.target_scale()}};
    }
  }
  fail(ErrorKind::model_io, "unknown model family");
}

std::shared_ptr<const Predictor> predictor_from_json(Family family, const json& j) {
  switch (family) {
    case Family::random_forest: {
      std::vector<RegressionTree> trees;
      for (const auto& t : j.at("trees")) trees.push_back(tree_from_json(t));
      return std::make_shared<RandomForest>(j.at("arity").get<std::size_t>(), std::move(trees));
    }
    case Family::gradient_boosting: {
      std::vector<RegressionTree> stages;
      for (const auto& t : j.at("stages")) stages.push_back(tree_from_json(t));
      return std::make_shared<GradientBoosting>(j.at("arity").get<std::size_t>(), j.at("base").get<double>(),
                                                j.at("learning_rate").get<double>(), std::move(stages));
    }
    case Family::elastic_net:
    case Family::svr: {
      auto lin = std::make_shared<LinearModel>(vec_from_json(j.at("weights")), j.at("intercept").get<double>());
      lin->converged = j.at("converged").get<bool>();
      lin->iterations = j.at("iterations").get<std::size_t>();
      return lin;
    }
    case Family::mlp: {
      std::vector<Mlp::Layer> layers;
      for (const auto& l : j.at("layers")) {
        const auto rows = l.at("rows").get<Eigen::Index>();
        const auto cols = l.at("cols").get<Eigen::Index>();
        const Vector w = vec_from_json(l.at("weights"));
        if (w.size() != rows * cols) fail(ErrorKind::model_io, "MLP layer weight count mismatch");
        layers.push_back({w.reshaped(rows, cols), vec_from_json(l.at("bias"))});
      }
      return std::make_shared<Mlp>(std::move(layers), j.at("target_mean").get<double>(),
                                   j.at("target_scale").get<double>());
    }
  }
  fail(ErrorKind::model_io, "unknown model family");
}

}  // namespace

const std::vector<Family>& all_families() {
  static const std::vector<Family> families{Family::random_forest, Family::elastic_net, Family::gradient_boosting,
                                            Family::svr, Family::mlp};
  return families;
}

std::string family_tag(Family family) {
  switch (family) {
    case Family::random_forest: return "rf";
    case Family::elastic_net: return "enet";
    case Family::gradient_boosting: return "gbm";
    case Family::svr: return "svr";
    case Family::mlp: return "mlp";
  }
  return "unknown";
}

Family parse_family(std::string_view name) {
  std::string n(name);
  std::transform(n.begin(), n.end(), n.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (n == "rf" || n == "forest" || n == "random_forest") return Family::random_forest;
  if (n == "enet" || n == "elasticnet" || n == "elastic_net" || n == "elasticnetglm") return Family::elastic_net;
  if (n == "gbm" || n == "boosting" || n == "gradient_boosting") return Family::gradient_boosting;
  if (n == "svr" || n == "svm") return Family::svr;
  if (n == "mlp" || n == "nn") return Family::mlp;
  fail(ErrorKind::invalid_argument, "unknown model family '" + std::string(name) + "' (expected rf, enet, gbm, svr, mlp)");
}

FamilyParams default_params(Family family) {
  switch (family) {
    case Family::random_forest: return ForestParams{};
    case Family::elastic_net: return ElasticNetParams{};
    case Family::gradient_boosting: return GbmParams{};
    case Family::svr: return SvrParams{};
    case Family::mlp: return MlpParams{};
  }
  return ForestParams{};
}

Family family_of(const FamilyParams& params) {
  return std::visit(overloaded{[](const ForestParams&) { return Family::random_forest; },
                               [](const ElasticNetParams&) { return Family::elastic_net; },
                               [](const GbmParams&) { return Family::gradient_boosting; },
                               [](const SvrParams&) { return Family::svr; },
                               [](const MlpParams&) { return Family::mlp; }},
                    params);
}

void validate(const FamilyParams& params) {
  std::visit([](const auto& p) { p.validate(); }, params);
}

std::vector<std::string> param_names(Family family) {
  switch (family) {
    case Family::random_forest:
      return {"n_estimators", "max_depth", "min_samples_leaf", "min_samples_split", "max_features", "bootstrap"};
    case Family::elastic_net: return {"alpha", "l1_ratio", "fit_intercept", "tol", "max_iter"};
    case Family::gradient_boosting:
      return {"n_stages", "learning_rate", "max_depth", "min_samples_leaf", "min_samples_split", "max_features"};
    case Family::svr: return {"epsilon", "c", "epochs", "step_size"};
    case Family::mlp:
      return {"hidden_width", "hidden_layers", "max_iter", "learning_rate", "adaptive", "batch_size", "momentum", "tol",
              "standardize_target"};
  }
  return {};
}

void set_param(FamilyParams& params, std::string_view name, double v) {
  if (!std::isfinite(v)) fail(ErrorKind::invalid_argument, "parameter '" + std::string(name) + "' must be finite");
  const Family family = family_of(params);
  std::visit(
      overloaded{
          [&](ForestParams& p) {
            if (name == "n_estimators") p.n_estimators = as_count(name, v);
            else if (name == "max_depth") p.max_depth = static_cast<int>(as_count(name, v));
            else if (name == "min_samples_leaf") p.min_samples_leaf = as_count(name, v);
            else if (name == "min_samples_split") p.min_samples_split = as_count(name, v);
            else if (name == "max_features") p.max_features = as_count(name, v);
            else if (name == "bootstrap") p.bootstrap = as_flag(name, v);
            else unknown_param(family, name);
          },
          [&](ElasticNetParams& p) {
            if (name == "alpha") p.alpha = v;
            else if (name == "l1_ratio") p.l1_ratio = v;
            else if (name == "fit_intercept") p.fit_intercept = as_flag(name, v);
            else if (name == "tol") p.tol = v;
            else if (name == "max_iter") p.max_iter = as_count(name, v);
            else unknown_param(family, name);
          },
          [&](GbmParams& p) {
            if (name == "n_stages") p.n_stages = as_count(name, v);
            else if (name == "learning_rate") p.learning_rate = v;
            else if (name == "max_depth") p.max_depth = static_cast<int>(as_count(name, v));
            else if (name == "min_samples_leaf") p.min_samples_leaf = as_count(name, v);
            else if (name == "min_samples_split") p.min_samples_split = as_count(name, v);
            else if (name == "max_features") p.max_features = as_count(name, v);
            else unknown_param(family, name);
          },
          [&](SvrParams& p) {
            if (name == "epsilon") p.epsilon = v;
            else if (name == "c") p.c = v;
            else if (name == "epochs") p.epochs = as_count(name, v);
            else if (name == "step_size") p.step_size = v;
            else unknown_param(family, name);
          },
          [&](MlpParams& p) {
            if (name == "hidden_width") {
              const std::size_t width = as_count(name, v);
              if (p.hidden_layers.empty()) p.hidden_layers.push_back(width);
              for (auto& w : p.hidden_layers) w = width;
            } else if (name == "hidden_layers") {
              const std::size_t width = p.hidden_layers.empty() ? 50 : p.hidden_layers.front();
              p.hidden_layers.assign(as_count(name, v), width);
            } else if (name == "max_iter") p.max_iter = as_count(name, v);
            else if (name == "learning_rate") p.learning_rate = v;
            else if (name == "adaptive") p.adaptive = as_flag(name, v);
            else if (name == "batch_size") p.batch_size = as_count(name, v);
            else if (name == "momentum") p.momentum = v;
            else if (name == "tol") p.tol = v;
            else if (name == "standardize_target") p.standardize_target = as_flag(name, v);
            else unknown_param(family, name);
          },
      },
      params);
}

void set_seed(FamilyParams& params, std::uint64_t seed) {
  std::visit(overloaded{[](ElasticNetParams&) {}, [&](auto& p) { p.seed = seed; }}, params);
}

std::shared_ptr<const Predictor> fit_model(const FamilyParams& params, const Matrix& x, const Vector& y) {
  return std::visit(
      overloaded{
          [&](const ForestParams& p) -> std::shared_ptr<const Predictor> {
            return std::make_shared<RandomForest>(fit_forest(x, y, p));
          },
          [&](const ElasticNetParams& p) -> std::shared_ptr<const Predictor> {
            return std::make_shared<LinearModel>(fit_elastic_net(x, y, p));
          },
          [&](const GbmParams& p) -> std::shared_ptr<const Predictor> {
            return std::make_shared<GradientBoosting>(fit_gbm(x, y, p));
          },
          [&](const SvrParams& p) -> std::shared_ptr<const Predictor> {
            return std::make_shared<LinearModel>(fit_svr(x, y, p));
          },
          [&](const MlpParams& p) -> std::shared_ptr<const Predictor> {
            return std::make_shared<Mlp>(fit_mlp(x, y, p));
          },
      },
      params);
}

json params_to_json(const FamilyParams& params) {
  return std::visit(
      overloaded{
          [](const ForestParams& p) -> json {
            return {{"n_estimators", p.n_estimators}, {"max_depth", p.max_depth},
                    {"min_samples_leaf", p.min_samples_leaf}, {"min_samples_split", p.min_samples_split},
                    {"max_features", p.max_features}, {"bootstrap", p.bootstrap}, {"seed", p.seed}};
          },
          [](const ElasticNetParams& p) -> json {
            return {{"alpha", p.alpha}, {"l1_ratio", p.l1_ratio}, {"fit_intercept", p.fit_intercept},
                    {"tol", p.tol}, {"max_iter", p.max_iter}, {"selection", "cyclic"}};
          },
          [](const GbmParams& p) -> json {
            return {{"n_stages", p.n_stages}, {"learning_rate", p.learning_rate}, {"max_depth", p.max_depth},
                    {"min_samples_leaf", p.min_samples_leaf}, {"min_samples_split", p.min_samples_split},
                    {"max_features", p.max_features}, {"seed", p.seed}};
          },
          [](const SvrParams& p) -> json {
            return {{"epsilon", p.epsilon}, {"c", p.c}, {"epochs", p.epochs}, {"step_size", p.step_size},
                    {"seed", p.seed}};
          },
          [](const MlpParams& p) -> json {
            return {{"hidden_layers", p.hidden_layers}, {"max_iter", p.max_iter}, {"learning_rate", p.learning_rate},
                    {"adaptive", p.adaptive}, {"batch_size", p.batch_size}, {"momentum", p.momentum},
                    {"tol", p.tol}, {"standardize_target", p.standardize_target}, {"seed", p.seed}};
          },
      },
      params);
}

FamilyParams params_from_json(Family family, const json& j) {
  FamilyParams params = default_params(family);
  for (const auto& [key, value] : j.items()) {
    if (key == "seed") {
      set_seed(params, value.get<std::uint64_t>());
    } else if (key == "selection") {
      if (value != "cyclic") fail(ErrorKind::model_io, "unsupported elastic net selection rule");
    } else if (key == "hidden_layers") {
      std::get<MlpParams>(params).hidden_layers = value.get<std::vector<std::size_t>>();
    } else {
      set_param(params, key, value.is_boolean() ? (value.get<bool>() ? 1.0 : 0.0) : value.get<double>());
    }
  }
  return params;
}

json scaler_to_json(const Scaler& s) {
  return {{"mean", vec_to_json(s.mean)}, {"std", vec_to_json(s.std)}, {"zero_variance", s.zero_variance}};
}

Scaler scaler_from_json(const json& j) {
  Scaler s;
  s.mean = vec_from_json(j.at("mean"));
  s.std = vec_from_json(j.at("std"));
  s.zero_variance = j.at("zero_variance").get<Mask>();
  if (s.std.size() != s.mean.size() || s.zero_variance.size() != static_cast<std::size_t>(s.mean.size()))
    fail(ErrorKind::model_io, "scaler fields disagree on arity");
  return s;
}

std::vector<std::size_t> TrainedModel::kept_columns() const {
  std::vector<std::size_t> cols;
  for (std::size_t j = 0; j < mask.size(); ++j)
    if (mask[j]) cols.push_back(j);
  return cols;
}

std::vector<std::string> TrainedModel::kept_names() const {
  std::vector<std::string> names;
  for (std::size_t j : kept_columns()) names.push_back(feature_names()[j]);
  return names;
}

Matrix TrainedModel::prepare(const Matrix& raw) const {
  if (static_cast<std::size_t>(raw.cols()) != kFeatures)
    fail(ErrorKind::invalid_argument, "raw rows must have 24 features");
  const auto cols = kept_columns();
  Matrix kept(raw.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t c = 0; c < cols.size(); ++c) kept.col(c) = raw.col(cols[c]);
  return scaler ? scaler->transform(kept, cols) : kept;
}

double TrainedModel::predict_raw(const Vector& raw) const {
  return predictor->predict(Vector(prepare(raw.transpose()).row(0).transpose()));
}

Vector TrainedModel::predict_raw(const Dataset& ds) const { return predictor->predict_batch(prepare(ds.features())); }

std::shared_ptr<const Predictor> TrainedModel::unscaled_predictor() const {
  const auto cols = kept_columns();
  auto inner = predictor;
  auto s = scaler;
  return std::make_shared<FunctionPredictor>(cols.size(), [inner, s, cols](const Eigen::Ref<const Vector>& x) {
    if (!s) return inner->predict(x);
    Vector z(x.size());
    for (std::size_t c = 0; c < cols.size(); ++c)
      z(c) = s->zero_variance[cols[c]] ? 0.0 : (x(c) - s->mean(cols[c])) / s->std(cols[c]);
    return inner->predict(z);
  });
}

json model_to_json(const TrainedModel& model) {
  json j;
  j["format"] = kModelFormatName;
  j["version"] = kModelFormatVersion;
  j["family"] = family_tag(model.family);
  j["params"] = params_to_json(model.params);
  j["mask"] = model.mask;
  j["features"] = model.kept_names();
  j["scaler"] = model.scaler ? scaler_to_json(*model.scaler) : json(nullptr);
  j["model"] = predictor_to_json(model.family, *model.predictor);
  return j;
}

TrainedModel model_from_json(const json& j) {
  try {
    if (!j.is_object() || j.value("format", std::string{}) != kModelFormatName)
      fail(ErrorKind::model_io, "not a rul-explain model file");
    const int version = j.at("version").get<int>();
    if (version != kModelFormatVersion)
      fail(ErrorKind::model_io, "unsupported model file version " + std::to_string(version) + " (this build reads version " +
                                    std::to_string(kModelFormatVersion) + ")");
    TrainedModel m;
    m.family = parse_family(j.at("family").get<std::string>());
    m.params = params_from_json(m.family, j.at("params"));
    m.mask = j.at("mask").get<Mask>();
    if (m.mask.size() != kFeatures) fail(ErrorKind::model_io, "model mask must have 24 entries");
    if (!j.at("scaler").is_null()) {
      m.scaler = scaler_from_json(j.at("scaler"));
      if (m.scaler->arity() != kFeatures) fail(ErrorKind::model_io, "model scaler must cover 24 features");
    }
    m.predictor = predictor_from_json(m.family, j.at("model"));
    if (m.predictor->arity() != m.kept_columns().size())
      fail(ErrorKind::model_io, "model arity does not match its feature mask");
    return m;
  } catch (const json::exception& e) {
    fail(ErrorKind::model_io, std::string("malformed model file: ") + e.what());
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::model_io) throw;
    fail(ErrorKind::model_io, std::string("malformed model file: ") + e.what());
  }
}

void save_model(const TrainedModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::io, "cannot write model file '" + path + "'");
  out << model_to_json(model).dump(1) << '\n';
  if (!out) fail(ErrorKind::io, "failed writing model file '" + path + "'");
}

TrainedModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::io, "cannot open model file '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    fail(ErrorKind::model_io, "model file '" + path + "' is not valid JSON: " + e.what());
  }
  return model_from_json(j);
}

}  // namespace rulx
