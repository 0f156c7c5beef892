#include "commands.hpp"

#include "rulx/parallel.hpp"
#include "rulx/random.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace rulx::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

template <typename Fn>
auto stage(const std::string& name, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const Refusal&) {
    throw;
  } catch (const Error& e) {
    const std::string what = e.what();
    if (what.rfind("stage '", 0) == 0) throw;
    throw Error(e.kind(), "stage '" + name + "': " + what);
  }
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fail(ErrorKind::io, "cannot create output directory '" + dir + "': " + ec.message());
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) fail(ErrorKind::io, "cannot write '" + path + "'");
  f << text;
  f.close();
  if (!f) fail(ErrorKind::io, "error while writing '" + path + "'");
}

void write_json(const std::string& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

std::string join(const std::string& dir, const std::string& name) { return (fs::path(dir) / name).string(); }

std::string fixed(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

json selection_to_json(const FeatureSelection& sel) {
  json ranking = json::array();
  for (const auto& [name, importance] : sel.ranking) {
    std::size_t c = 0;
    while (c < kFeatures && feature_names()[c] != name) ++c;
    ranking.push_back({{"feature", name}, {"importance", importance}, {"kept", bool(sel.mask[c])},
                       {"constant", bool(sel.constant[c])}});
  }
  json kept = json::array();
  for (std::size_t c = 0; c < kFeatures; ++c)
    if (sel.mask[c]) kept.push_back(feature_names()[c]);
  return {{"rule", sel.rule.describe()}, {"degenerate", sel.degenerate}, {"kept", kept}, {"ranking", ranking}};
}

struct Prepared {
  Dataset full;
  Split split;
  std::optional<Scaler> scaler;
  FeatureSelection selection;
};

Prepared prepare(const RunConfig& cfg) {
  Prepared p;
  p.full = stage("load", [&] { return load_dataset(cfg); });
  p.split = stage("split", [&] { return split_dataset(p.full, cfg); });
  if (cfg.scale) p.scaler = stage("scale", [&] { return fit_scaler(p.split.train); });
  ForestParams ranking;
  ranking.seed = derive_seed(cfg.seed, "rank");
  p.selection = stage("select", [&] { return rank_and_select(p.split.train, ranking, cfg.selection_rule()); });
  return p;
}

std::string model_file(const std::string& dir, Family f) { return join(dir, "model_" + family_tag(f) + ".json"); }

}  // namespace

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_argument: return kExitUsage;
    case ErrorKind::parse:
    case ErrorKind::data: return kExitData;
    case ErrorKind::model_io: return kExitModelFile;
    case ErrorKind::training: return kExitTraining;
    case ErrorKind::io: return kExitIo;
  }
  return 1;
}

Dataset load_dataset(const RunConfig& cfg) {
  if (!cfg.data.empty()) return label_rul(read_cmapss(cfg.data), cfg.rul_cap);
  Dataset ds = simulate_degradation(cfg.synthetic_units, cfg.synthetic_seed, cfg.synthetic_noise);
  if (cfg.rul_cap) ds = label_rul(std::move(ds), cfg.rul_cap);
  return ds;
}

Split split_dataset(const Dataset& ds, const RunConfig& cfg) {
  const std::uint64_t seed = derive_seed(cfg.seed, "split");
  return cfg.split_mode == "units" ? split_units(ds, cfg.test_fraction, seed)
                                   : split_rows(ds, cfg.test_fraction, seed);
}

void cmd_simulate(std::size_t n_units, std::uint64_t seed, double noise, const std::string& output_path,
                  std::ostream& out) {
  if (n_units == 0) fail(ErrorKind::invalid_argument, "--units must be at least 1");
  const Dataset ds = simulate_degradation(n_units, seed, noise);
  if (auto parent = fs::path(output_path).parent_path(); !parent.empty()) ensure_dir(parent.string());
  std::ostringstream text;
  write_cmapss(text, ds);
  write_text(output_path, text.str());
  out << "wrote " << ds.size() << " records for " << n_units << " units to " << output_path << "\n";
}

void cmd_train(const RunConfig& cfg, std::ostream& out) {
  const Dataset full = stage("load", [&] { return load_dataset(cfg); });
  const Split split = stage("split", [&] { return split_dataset(full, cfg); });
  ExperimentReport report = run_experiment(split.train, split.test, cfg.experiment());
  report.stage_seeds.insert(report.stage_seeds.begin(), {"split", derive_seed(cfg.seed, "split")});

  stage("write", [&] {
    ensure_dir(cfg.out);
    for (const auto& m : report.models) save_model(m.model, model_file(cfg.out, m.family));
    write_json(join(cfg.out, "scaler.json"), report.scaler ? scaler_to_json(*report.scaler) : json(nullptr));
    write_json(join(cfg.out, "selection.json"), selection_to_json(report.selection));
    write_json(join(cfg.out, "report.json"), report_to_json(report));
  });

  out << "train rows " << report.n_train << ", test rows " << report.n_test << ", features kept "
      << report.selection.kept() << " of " << kFeatures << "\n";
  for (const auto& m : report.models)
    out << family_tag(m.family) << "  mse " << fixed(m.mse) << "  mae " << fixed(m.mae) << "\n";
  for (const auto& w : report.warnings) out << "warning: " << w << "\n";
  out << "artifacts in " << cfg.out << "\n";
}

void cmd_evaluate(const RunConfig& cfg, const std::optional<std::string>& model_path, std::ostream& out) {
  std::vector<std::string> paths;
  if (model_path) {
    paths.push_back(*model_path);
  } else {
    for (Family f : cfg.models) paths.push_back(model_file(cfg.out, f));
  }
  const Dataset full = stage("load", [&] { return load_dataset(cfg); });
  const Split split = stage("split", [&] { return split_dataset(full, cfg); });
  const Vector y = split.test.targets();

  json results = json::array();
  for (const auto& path : paths) {
    const TrainedModel model = stage("load-model", [&] { return load_model(path); });
    const std::string tag = family_tag(model.family);
    const Vector predicted = stage("evaluate:" + tag, [&] { return model.predict_raw(split.test); });
    const double m2 = mse(y, predicted), m1 = mae(y, predicted);
    results.push_back({{"model", path}, {"family", tag}, {"mse", m2}, {"mae", m1}});
    out << tag << "  mse " << fixed(m2) << "  mae " << fixed(m1) << "\n";
  }
  stage("write", [&] {
    ensure_dir(cfg.out);
    write_json(join(cfg.out, "evaluation.json"),
               {{"dataset", split.test.provenance}, {"n_test", split.test.size()}, {"results", results}});
  });
}

void cmd_grid_search(const RunConfig& cfg, std::ostream& out) {
  std::vector<Family> families;
  for (Family f : cfg.models)
    if (cfg.grids.count(f)) families.push_back(f);
  if (families.empty())
    fail(ErrorKind::invalid_argument, "no grid configured; add keys such as 'grid.rf.max_depth = 3, 6, 9'");

  const Prepared p = prepare(cfg);
  TrainedModel shell;
  shell.scaler = p.scaler;
  shell.mask = p.selection.mask;
  const Matrix x = shell.prepare(p.split.train.features());
  const Vector y = p.split.train.targets();

  ensure_dir(cfg.out);
  for (Family f : families) {
    const std::string tag = family_tag(f);
    GridSpec spec{cfg.params.at(f), cfg.grids.at(f), cfg.cv_folds, derive_seed(cfg.seed, "grid/" + tag)};
    set_seed(spec.base, derive_seed(cfg.seed, "model/" + tag));
    const GridResult result = stage("grid:" + tag, [&] { return grid_search(x, y, spec); });
    stage("write", [&] {
      write_json(join(cfg.out, "grid_" + tag + ".json"), grid_to_json(result));
      write_text(join(cfg.out, "grid_" + tag + ".csv"), grid_to_csv(result));
    });
    const auto& best = result.table[result.best];
    out << tag << " best";
    for (const auto& [name, value] : best.values) out << " " << name << "=" << format_value(value);
    out << "  cv mse " << fixed(best.mean_mse) << "  (" << result.table.size() << " combinations)\n";
  }
}

void cmd_rank_features(const RunConfig& cfg, std::ostream& out) {
  const Prepared p = prepare(cfg);
  ensure_dir(cfg.out);
  stage("write", [&] { write_json(join(cfg.out, "ranking.json"), selection_to_json(p.selection)); });
  if (p.selection.degenerate) out << "warning: ranking forest never split; importances are all zero\n";
  for (const auto& [name, importance] : p.selection.ranking) {
    std::size_t c = 0;
    while (feature_names()[c] != name) ++c;
    out << fixed(importance, 6) << "  " << name << (p.selection.mask[c] ? "" : "  (dropped)") << "\n";
  }
}

void cmd_explain(const RunConfig& cfg, const ExplainRequest& request, std::ostream& out) {
  const TrainedModel model = stage("load-model", [&] { return load_model(request.model_path); });
  const Dataset full = stage("load", [&] { return load_dataset(cfg); });
  if (request.row >= full.size())
    fail(ErrorKind::invalid_argument, "row " + std::to_string(request.row) + " is out of range (dataset has " +
                                          std::to_string(full.size()) + " rows)");
  const auto cols = model.kept_columns();
  const auto names = model.kept_names();
  if (request.method == ExplainMethod::exact_shapley && cols.size() > kMaxExactShapleyFeatures)
    throw Refusal("exact Shapley enumeration is limited to " + std::to_string(kMaxExactShapleyFeatures) +
                  " features but this model uses " + std::to_string(cols.size()) +
                  "; use --method shap, or train with fewer features (select.rule = top_k)");

  const Split split = stage("split", [&] { return split_dataset(full, cfg); });
  const Matrix train_kept = split.train.features(model.mask);
  const std::uint64_t bg_seed = derive_seed(cfg.seed, "explain/background");
  const Matrix background = sample_background(train_kept, cfg.explain_background, bg_seed);
  const CycleRecord& rec = full.records[request.row];
  Vector instance(static_cast<Eigen::Index>(cols.size()));
  for (std::size_t c = 0; c < cols.size(); ++c) instance(c) = rec.feature(cols[c]);

  const auto predictor = model.unscaled_predictor();
  const std::uint64_t explain_seed = derive_seed(cfg.seed, "explain/" + method_tag(request.method));
  Explanation e = stage("explain", [&] {
    switch (request.method) {
      case ExplainMethod::lime: {
        LimeOptions o;
        o.n_samples = cfg.explain_samples;
        o.k_features = std::min(cfg.explain_k_features, cols.size());
        o.seed = explain_seed;
        o.feature_names = names;
        return lime_explain(*predictor, instance, background, o);
      }
      case ExplainMethod::kernel_shap: {
        KernelShapOptions o;
        o.n_coalitions = cfg.explain_coalitions;
        o.seed = explain_seed;
        o.feature_names = names;
        return kernel_shap(*predictor, instance, background, o);
      }
      case ExplainMethod::exact_shapley: break;
    }
    return exact_shapley(*predictor, instance, background, {}, names);
  });
  e.metadata["row"] = request.row;
  e.metadata["unit_id"] = rec.unit_id;
  e.metadata["cycle"] = rec.cycle;
  if (rec.rul) e.metadata["actual_rul"] = *rec.rul;
  e.metadata["family"] = family_tag(model.family);
  e.metadata["model_file"] = request.model_path;
  e.metadata["dataset"] = full.provenance;
  e.metadata["background_rows"] = background.rows();
  e.metadata["seed"] = explain_seed;

  const std::string base = request.output.empty()
                               ? join(cfg.out, "explain_row" + std::to_string(request.row) + "_" +
                                                   method_tag(request.method))
                               : request.output;
  const std::string rendered_path = base + (request.style == RenderStyle::text ? ".txt" : ".svg");
  stage("write", [&] {
    if (auto parent = fs::path(base).parent_path(); !parent.empty()) ensure_dir(parent.string());
    write_json(base + ".json", to_json(e));
    write_text(rendered_path, render_explanation(e, request.style));
  });
  out << "predicted value: " << format_value(e.predicted_value) << "\n";
  out << "base value: " << format_value(e.base_value) << "\n";
  out << "wrote " << base << ".json and " << rendered_path << "\n";
}

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Train, evaluate and explain remaining-useful-life regressors on C-MAPSS style telemetry."};
  app.require_subcommand(1);
  app.set_version_flag("--version", "rul_explain 0.1.0");

  std::string config_path, data, out_dir, model_family, model_path, method, style, output;
  std::uint64_t seed = 0;
  std::size_t row = 0, units = 100;
  double noise = 1.0;
  std::vector<std::string> overrides;

  struct Sub {
    CLI::App* app;
    CLI::Option* seed = nullptr;
    CLI::Option* data = nullptr;
    CLI::Option* out = nullptr;
  };
  auto common = [&](CLI::App* sub) {
    Sub s{sub};
    sub->add_option("--config", config_path, "key = value settings file")->check(CLI::ExistingFile);
    s.data = sub->add_option("--data", data, "C-MAPSS text file (default: synthetic data)");
    s.out = sub->add_option("--out", out_dir, "output directory");
    s.seed = sub->add_option("--seed", seed, "top-level seed");
    sub->add_option("--set", overrides, "override a config key, e.g. --set rf.n_estimators=20");
    return s;
  };

  auto* simulate = app.add_subcommand("simulate", "write synthetic run-to-failure telemetry");
  auto* sim_out = simulate->add_option("--output,-o", output, "output file (C-MAPSS text)");
  auto* sim_dir = simulate->add_option("--out", out_dir, "output directory for simulated.txt");
  auto* sim_seed = simulate->add_option("--seed", seed, "simulator seed (default 1)");
  simulate->add_option("--units", units, "engine units")->capture_default_str();
  simulate->add_option("--noise", noise, "sensor noise multiplier")->capture_default_str();

  Sub train = common(app.add_subcommand("train", "fit every configured model family and write artifacts"));
  Sub evaluate = common(app.add_subcommand("evaluate", "score saved models on the test split"));
  evaluate.app->add_option("--model", model_family, "model family to evaluate (rf, enet, gbm, svr, mlp)");
  auto* eval_file = evaluate.app->add_option("--model-file", model_path, "model file to evaluate");
  Sub grid = common(app.add_subcommand("grid-search", "cross-validated hyperparameter search"));
  grid.app->add_option("--model", model_family, "restrict the search to one family");
  Sub rank = common(app.add_subcommand("rank-features", "rank features by forest importance"));
  Sub explain = common(app.add_subcommand("explain", "explain one prediction"));
  auto* ex_model = explain.app->add_option("--model", model_family, "family whose model_<tag>.json in --out to load");
  auto* ex_file = explain.app->add_option("--model-file", model_path, "model file to explain");
  auto* ex_row = explain.app->add_option("--row", row, "row index in the data file");
  auto* ex_method = explain.app->add_option("--method", method, "lime, shap or exact")
                        ->check(CLI::IsMember({"lime", "shap", "kernel_shap", "exact", "exact_shapley"}));
  auto* ex_style = explain.app->add_option("--style", style, "bar, force or text")
                       ->check(CLI::IsMember({"bar", "force", "text"}));
  explain.app->add_option("--output,-o", output, "output path without extension");
  ex_model->excludes(ex_file);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (simulate->parsed()) {
      std::string path = output;
      if (!sim_out->count()) path = join(sim_dir->count() ? out_dir : ".", "simulated.txt");
      cmd_simulate(units, sim_seed->count() ? seed : 1, noise, path, out);
      return kExitOk;
    }

    const Sub* active = nullptr;
    for (const Sub* s : {&train, &evaluate, &grid, &rank, &explain})
      if (s->app->parsed()) active = s;
    RunConfig cfg = config_path.empty() ? RunConfig{} : load_run_config(config_path);
    for (const auto& kv : overrides) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) fail(ErrorKind::invalid_argument, "--set expects key=value, got '" + kv + "'");
      cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (active->data->count()) cfg.data = data;
    if (active->out->count()) cfg.out = out_dir;
    if (active->seed->count()) cfg.seed = seed;
    if (!model_family.empty() && active != &explain) cfg.models = {parse_family(model_family)};

    if (active == &train) cmd_train(cfg, out);
    else if (active == &evaluate) cmd_evaluate(cfg, eval_file->count() ? std::optional(model_path) : std::nullopt, out);
    else if (active == &grid) cmd_grid_search(cfg, out);
    else if (active == &rank) cmd_rank_features(cfg, out);
    else {
      ExplainRequest req;
      if (ex_file->count()) req.model_path = model_path;
      else if (ex_model->count()) req.model_path = model_file(cfg.out, parse_family(model_family));
      else fail(ErrorKind::invalid_argument, "explain needs --model FAMILY or --model-file PATH");
      req.row = ex_row->count() ? row : cfg.explain_row;
      req.method = ex_method->count() ? parse_method(method) : cfg.explain_method;
      req.style = ex_style->count() ? parse_style(style) : cfg.explain_style;
      req.output = output;
      cmd_explain(cfg, req, out);
    }
    return kExitOk;
  } catch (const Refusal& e) {
    err << "refused: " << e.what() << "\n";
    return kExitRefused;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace rulx::cli
