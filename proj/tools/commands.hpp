#pragma once

#include "run_config.hpp"

#include <iosfwd>
#include <optional>
#include <string>

namespace rulx::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 2,
  kExitData = 3,
  kExitModelFile = 4,
  kExitTraining = 5,
  kExitIo = 6,
  kExitRefused = 7,
};

// A request the tool understands but declines, such as exact Shapley on too many features.
class Refusal : public Error {
 public:
  explicit Refusal(const std::string& what) : Error(ErrorKind::invalid_argument, what) {}
};

int exit_code(ErrorKind kind);

// Labeled data named by the config, or the synthetic generator's output.
Dataset load_dataset(const RunConfig& cfg);
Split split_dataset(const Dataset& ds, const RunConfig& cfg);

void cmd_simulate(std::size_t n_units, std::uint64_t seed, double noise, const std::string& output_path,
                  std::ostream& out);
// Writes model_<tag>.json, scaler.json, selection.json and report.json under cfg.out.
void cmd_train(const RunConfig& cfg, std::ostream& out);
void cmd_evaluate(const RunConfig& cfg, const std::optional<std::string>& model_path, std::ostream& out);
void cmd_grid_search(const RunConfig& cfg, std::ostream& out);
void cmd_rank_features(const RunConfig& cfg, std::ostream& out);

struct ExplainRequest {
  std::string model_path;
  std::size_t row = 0;
  ExplainMethod method = ExplainMethod::kernel_shap;
  RenderStyle style = RenderStyle::bar;
  // Path without extension; ".json" and ".svg" or ".txt" are appended.
  std::string output;
};

void cmd_explain(const RunConfig& cfg, const ExplainRequest& request, std::ostream& out);

// Parses argv, runs one subcommand and maps failures to exit codes.
int run(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace rulx::cli
