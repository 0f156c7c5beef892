#include "rulx/pipeline.hpp"
#include "rulx/random.hpp"

#include <chrono>
#include <cmath>
#include <set>

namespace rulx {

using nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

template <typename Fn>
auto run_stage(const std::string& stage, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const Error& e) {
    throw Error(e.kind(), "stage '" + stage + "': " + e.what());
  } catch (const std::exception& e) {
    throw Error(ErrorKind::training, "stage '" + stage + "': " + e.what());
  }
}

std::size_t overlapping_rows(const Dataset& train, const Dataset& test) {
  std::set<std::vector<double>> seen;
  auto key = [](const CycleRecord& r) {
    std::vector<double> k{static_cast<double>(r.unit_id), static_cast<double>(r.cycle)};
    for (std::size_t j = 0; j < kFeatures; ++j) k.push_back(r.feature(j));
    return k;
  };
  for (const auto& r : train.records) seen.insert(key(r));
  std::size_t hits = 0;
  for (const auto& r : test.records) hits += seen.count(key(r));
  return hits;
}

}  // namespace

ExperimentReport run_experiment(const Dataset& train, const Dataset& test, const ExperimentConfig& config) {
  ExperimentReport report;
  report.seed = config.seed;
  report.train_provenance = train.provenance;
  report.test_provenance = test.provenance;
  report.n_train = train.size();
  report.n_test = test.size();

  run_stage("validate", [&] {
    if (!train.labeled()) fail(ErrorKind::data, "training set must be labeled");
    if (!test.labeled()) fail(ErrorKind::data, "test set must be labeled");
    require(!config.families.empty(), "no model families configured");
  });

  if (const std::size_t overlap = overlapping_rows(train, test); overlap > 0) {
    report.warnings.push_back("leakage: " + std::to_string(overlap) + " of " + std::to_string(test.size()) +
                              " test rows also appear in the training set");
  }

  const auto total_start = Clock::now();
  const Vector y_train = train.targets();
  const Vector y_test = test.targets();

  auto start = Clock::now();
  if (config.scale) report.scaler = run_stage("scale", [&] { return fit_scaler(train); });
  report.timings.emplace_back("scale", seconds_since(start));

  start = Clock::now();
  ForestParams ranking = config.ranking_forest;
  ranking.seed = derive_seed(config.seed, "rank");
  report.stage_seeds.emplace_back("rank", ranking.seed);
  report.selection = run_stage("select", [&] { return rank_and_select(train, ranking, config.selection); });
  report.timings.emplace_back("select", seconds_since(start));

  TrainedModel shell;
  shell.scaler = report.scaler;
  shell.mask = report.selection.mask;
  const Matrix x_train = shell.prepare(train.features());
  const Matrix x_test = shell.prepare(test.features());

  for (const auto& family_config : config.families) {
    const Family family = family_of(family_config.params);
    const std::string tag = family_tag(family);
    ModelReport entry;
    entry.family = family;
    entry.params = family_config.params;
    const std::uint64_t model_seed = derive_seed(config.seed, "model/" + tag);
    set_seed(entry.params, model_seed);
    if (family != Family::elastic_net) report.stage_seeds.emplace_back("model/" + tag, model_seed);

    start = Clock::now();
    std::shared_ptr<const Predictor> predictor = run_stage("train:" + tag, [&] {
      validate(entry.params);
      if (family_config.grid.empty()) return fit_model(entry.params, x_train, y_train);
      GridSpec spec{entry.params, family_config.grid, config.cv_folds, derive_seed(config.seed, "grid/" + tag)};
      report.stage_seeds.emplace_back("grid/" + tag, spec.seed);
      GridResult grid = grid_search(x_train, y_train, spec);
      entry.params = grid.chosen;
      auto model = grid.model;
      entry.grid = std::move(grid);
      return model;
    });
    entry.fit_seconds = seconds_since(start);

    run_stage("evaluate:" + tag, [&] {
      const Vector predicted = predictor->predict_batch(x_test);
      if (!predicted.allFinite()) fail(ErrorKind::training, "model produced non-finite predictions");
      entry.mse = mse(y_test, predicted);
      entry.mae = mae(y_test, predicted);
    });
    if (const auto* lin = dynamic_cast<const LinearModel*>(predictor.get()); lin && !lin->converged)
      report.warnings.push_back(tag + ": solver stopped at max_iter before reaching tol");

    entry.model = shell;
    entry.model.family = family;
    entry.model.params = entry.params;
    entry.model.predictor = predictor;
    report.timings.emplace_back("fit:" + tag, entry.fit_seconds);
    report.models.push_back(std::move(entry));
  }
  report.timings.emplace_back("total", seconds_since(total_start));
  return report;
}

json report_to_json(const ExperimentReport& report, bool include_timings) {
  json j;
  j["dataset"] = {{"train", report.train_provenance},
                  {"test", report.test_provenance},
                  {"n_train", report.n_train},
                  {"n_test", report.n_test}};
  j["seed"] = report.seed;
  json seeds = json::object();
  for (const auto& [stage, seed] : report.stage_seeds) seeds[stage] = seed;
  j["stage_seeds"] = seeds;
  j["scaler"] = report.scaler ? scaler_to_json(*report.scaler) : json(nullptr);

  const auto& sel = report.selection;
  json ranking = json::array();
  for (const auto& [name, importance] : sel.ranking) {
    std::size_t column = 0;
    while (column < kFeatures && feature_names()[column] != name) ++column;
    ranking.push_back({{"feature", name},
                       {"importance", importance},
                       {"kept", column < kFeatures && sel.mask[column]},
                       {"constant", column < kFeatures && sel.constant[column]}});
  }
  json kept = json::array();
  for (std::size_t c = 0; c < sel.mask.size(); ++c)
    if (sel.mask[c]) kept.push_back(feature_names()[c]);
  j["feature_selection"] = {
      {"rule", sel.rule.describe()}, {"degenerate", sel.degenerate}, {"ranking", ranking}, {"kept", kept}};

  json models = json::array();
  for (const auto& m : report.models) {
    json entry = {{"family", family_tag(m.family)}, {"params", params_to_json(m.params)}, {"mse", m.mse}, {"mae", m.mae}};
    entry["grid"] = m.grid ? grid_to_json(*m.grid) : json(nullptr);
    models.push_back(entry);
  }
  j["models"] = models;
  j["warnings"] = report.warnings;
  if (include_timings) {
    json timings = json::object();
    for (const auto& [stage, secs] : report.timings) timings[stage] = secs;
    j["timings_seconds"] = timings;
  }
  return j;
}

}  // namespace rulx
