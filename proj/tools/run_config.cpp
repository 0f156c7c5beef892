#include "run_config.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace rulx::cli {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const std::string& expected) {
  fail(ErrorKind::invalid_argument, "config key '" + key + "': '" + value + "' is not " + expected);
}

double to_double(const std::string& key, const std::string& value) {
  const std::string v = trim(value);
  char* end = nullptr;
  errno = 0;
  const double d = std::strtod(v.c_str(), &end);
  if (v.empty() || *end != '\0' || errno == ERANGE || !std::isfinite(d)) bad_value(key, value, "a finite number");
  return d;
}

std::uint64_t to_u64(const std::string& key, const std::string& value) {
  const std::string v = trim(value);
  char* end = nullptr;
  errno = 0;
  const unsigned long long n = std::strtoull(v.c_str(), &end, 10);
  if (v.empty() || v[0] == '-' || *end != '\0' || errno == ERANGE) bad_value(key, value, "a non-negative integer");
  return n;
}

bool to_bool(const std::string& key, const std::string& value) {
  const std::string v = trim(value);
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  bad_value(key, value, "a boolean");
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> items;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) items.push_back(item);
  }
  return items;
}

}  // namespace

RunConfig::RunConfig() {
  for (Family f : all_families()) params.emplace(f, default_params(f));
}

void RunConfig::set(const std::string& raw_key, const std::string& raw_value) {
  const std::string key = trim(raw_key);
  const std::string value = trim(raw_value);
  if (key == "data") data = value;
  else if (key == "synthetic.units") {
    synthetic_units = to_u64(key, value);
    if (synthetic_units == 0) bad_value(key, value, "at least 1");
  } else if (key == "synthetic.seed") synthetic_seed = to_u64(key, value);
  else if (key == "synthetic.noise") synthetic_noise = to_double(key, value);
  else if (key == "rul_cap") {
    if (value == "none" || value.empty()) rul_cap.reset();
    else rul_cap = to_double(key, value);
  } else if (key == "split.test_fraction") {
    test_fraction = to_double(key, value);
    if (!(test_fraction > 0.0 && test_fraction < 1.0)) bad_value(key, value, "in (0, 1)");
  } else if (key == "split.mode") {
    if (value != "rows" && value != "units") bad_value(key, value, "rows or units");
    split_mode = value;
  } else if (key == "seed") seed = to_u64(key, value);
  else if (key == "scale") scale = to_bool(key, value);
  else if (key == "select.rule") {
    select_rule = value;
    selection_rule();
  } else if (key == "select.value") {
    select_value = to_double(key, value);
    selection_rule();
  } else if (key == "models") {
    models.clear();
    for (const auto& name : split_list(value)) {
      const Family f = parse_family(name);
      if (std::find(models.begin(), models.end(), f) == models.end()) models.push_back(f);
    }
    if (models.empty()) bad_value(key, value, "a non-empty list of model families");
  } else if (key == "grid.cv_folds") {
    cv_folds = to_u64(key, value);
    if (cv_folds < 2) bad_value(key, value, "at least 2");
  } else if (key.rfind("grid.", 0) == 0) {
    const std::string rest = key.substr(5);
    const auto dot = rest.find('.');
    if (dot == std::string::npos) fail(ErrorKind::invalid_argument, "unknown config key '" + key + "'");
    const Family f = parse_family(rest.substr(0, dot));
    const std::string name = rest.substr(dot + 1);
    GridAxis axis{name, {}};
    for (const auto& item : split_list(value)) axis.values.push_back(to_double(key, item));
    if (axis.values.empty()) bad_value(key, value, "a non-empty comma-separated list");
    FamilyParams probe = default_params(f);
    for (double v : axis.values) set_param(probe, name, v);
    auto& axes = grids[f];
    axes.erase(std::remove_if(axes.begin(), axes.end(), [&](const GridAxis& a) { return a.name == name; }),
               axes.end());
    axes.push_back(std::move(axis));
  } else if (key == "explain.method") explain_method = parse_method(value);
  else if (key == "explain.style") explain_style = parse_style(value);
  else if (key == "explain.row") explain_row = to_u64(key, value);
  else if (key == "explain.n_samples") explain_samples = to_u64(key, value);
  else if (key == "explain.n_coalitions") explain_coalitions = to_u64(key, value);
  else if (key == "explain.background") {
    explain_background = to_u64(key, value);
    if (explain_background == 0) bad_value(key, value, "at least 1");
  } else if (key == "explain.k_features") explain_k_features = to_u64(key, value);
  else if (key == "out") out = value;
  else if (const auto dot = key.find('.'); dot != std::string::npos) {
    Family f;
    try {
      f = parse_family(key.substr(0, dot));
    } catch (const Error&) {
      fail(ErrorKind::invalid_argument, "unknown config key '" + key + "'");
    }
    const std::string name = key.substr(dot + 1);
    if (name == "seed") fail(ErrorKind::invalid_argument, "config key '" + key + "': per-model seeds derive from 'seed'");
    set_param(params.at(f), name, to_double(key, value));
  } else {
    fail(ErrorKind::invalid_argument, "unknown config key '" + key + "'");
  }
}

SelectionRule RunConfig::selection_rule() const {
  const double fallback = select_rule == "top_k" ? static_cast<double>(kFeatures) : 0.005;
  return parse_selection_rule(select_rule, select_value.value_or(fallback));
}

ExperimentConfig RunConfig::experiment() const {
  ExperimentConfig cfg;
  cfg.scale = scale;
  cfg.selection = selection_rule();
  cfg.cv_folds = cv_folds;
  cfg.seed = seed;
  for (Family f : models) {
    FamilyConfig fc{params.at(f), {}};
    if (auto it = grids.find(f); it != grids.end()) fc.grid = it->second;
    cfg.families.push_back(std::move(fc));
  }
  return cfg;
}

RunConfig parse_run_config(const std::string& text, const std::string& origin) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      fail(ErrorKind::invalid_argument, origin + ":" + std::to_string(number) + ": expected 'key = value'");
    try {
      cfg.set(t.substr(0, eq), t.substr(eq + 1));
    } catch (const Error& e) {
      fail(e.kind(), origin + ":" + std::to_string(number) + ": " + e.what());
    }
  }
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::invalid_argument, "cannot read config file '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_run_config(buffer.str(), path);
}

std::vector<std::array<std::string, 3>> describe_keys() {
  return {
      {"data", "(empty)", "C-MAPSS text file; empty uses the synthetic generator"},
      {"synthetic.units", "100", "engine units to simulate"},
      {"synthetic.seed", "1", "simulator seed"},
      {"synthetic.noise", "1.0", "sensor noise multiplier"},
      {"rul_cap", "none", "clamp RUL labels at this value"},
      {"split.test_fraction", "0.2", "share of rows (or units) held out for testing"},
      {"split.mode", "rows", "rows or units"},
      {"seed", "42", "top-level seed; every stage seed derives from it"},
      {"scale", "true", "z-score features using train statistics"},
      {"select.rule", "threshold", "threshold, top_k or none"},
      {"select.value", "0.005", "importance threshold or k"},
      {"models", "rf,enet,gbm,svr,mlp", "families to train"},
      {"<family>.<param>", "family default", "hyperparameter, e.g. rf.n_estimators = 10"},
      {"grid.<family>.<param>", "(none)", "comma-separated values to search"},
      {"grid.cv_folds", "3", "cross-validation folds for grid search"},
      {"explain.method", "shap", "lime, shap or exact"},
      {"explain.style", "bar", "bar, force or text"},
      {"explain.row", "0", "row of the data file to explain"},
      {"explain.n_samples", "5000", "LIME perturbation samples"},
      {"explain.n_coalitions", "2048", "Kernel SHAP coalition budget beyond 12 features"},
      {"explain.background", "100", "background rows drawn from the data"},
      {"explain.k_features", "8", "LIME features kept"},
      {"out", "out", "output directory"},
  };
}

}  // namespace rulx::cli
