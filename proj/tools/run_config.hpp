#pragma once

#include "rulx/explain.hpp"
#include "rulx/pipeline.hpp"

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace rulx::cli {

// Plain "key = value" settings. Lines starting with '#' are comments.
// Every key and its default is listed by describe_keys().
struct RunConfig {
  // Input: a C-MAPSS text file, or the synthetic generator when empty.
  std::string data;
  std::size_t synthetic_units = 100;
  std::uint64_t synthetic_seed = 1;
  double synthetic_noise = 1.0;
  std::optional<double> rul_cap;

  double test_fraction = 0.2;
  std::string split_mode = "rows";

  std::uint64_t seed = 42;
  bool scale = true;
  std::string select_rule = "threshold";
  // Defaults to 0.005 for threshold and to every feature for top_k.
  std::optional<double> select_value;

  std::vector<Family> models = all_families();
  std::map<Family, FamilyParams> params;
  std::map<Family, std::vector<GridAxis>> grids;
  std::size_t cv_folds = 3;

  ExplainMethod explain_method = ExplainMethod::kernel_shap;
  RenderStyle explain_style = RenderStyle::bar;
  std::size_t explain_row = 0;
  std::size_t explain_samples = 5000;
  std::size_t explain_coalitions = 2048;
  std::size_t explain_background = 100;
  std::size_t explain_k_features = 8;

  std::string out = "out";

  RunConfig();

  // Throws Error(invalid_argument) for unknown keys or bad values.
  void set(const std::string& key, const std::string& value);

  SelectionRule selection_rule() const;
  ExperimentConfig experiment() const;
};

RunConfig load_run_config(const std::string& path);
RunConfig parse_run_config(const std::string& text, const std::string& origin = "config");

// key, default, meaning
std::vector<std::array<std::string, 3>> describe_keys();

}  // namespace rulx::cli
