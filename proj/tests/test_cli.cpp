#include <doctest.h>

#include "commands.hpp"

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace rulx;
using namespace rulx::cli;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string output;
};

fs::path scratch() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / "rulx_cli_test";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Runs the installed binary through the shell; stdout and stderr are merged.
Result run_binary(const std::string& args, const std::string& env = "") {
  const fs::path log = scratch() / "last_run.log";
  const std::string cmd = env + " " RUL_EXPLAIN_BIN " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(log)};
}

const fs::path& data_file() {
  static const fs::path path = [] {
    const fs::path p = scratch() / "sim.txt";
    REQUIRE(run_binary("simulate --units 6 --seed 3 -o " + p.string()).code == 0);
    return p;
  }();
  return path;
}

const std::string kQuick = " --set mlp.max_iter=20 --set gbm.n_stages=20 --set rf.n_estimators=20";

// A trained output directory shared by the explain tests.
const fs::path& trained() {
  static const fs::path dir = [] {
    const fs::path d = scratch() / "trained";
    const Result r = run_binary("train --data " + data_file().string() + " --out " + d.string() + kQuick);
    INFO(r.output);
    REQUIRE(r.code == 0);
    return d;
  }();
  return dir;
}

nlohmann::json read_json(const fs::path& p) { return nlohmann::json::parse(slurp(p)); }

}  // namespace

TEST_CASE("config files and overrides") {
  const RunConfig cfg = parse_run_config(
      "# comment\nseed = 7\nmodels = rf, enet\nrf.n_estimators = 12\nselect.rule = top_k\nselect.value = 5\n"
      "grid.enet.alpha = 0.1, 1\nrul_cap = 125\n");
  CHECK(cfg.seed == 7);
  CHECK(cfg.models == std::vector<Family>{Family::random_forest, Family::elastic_net});
  CHECK(std::get<ForestParams>(cfg.params.at(Family::random_forest)).n_estimators == 12);
  CHECK(cfg.selection_rule().kind == SelectionRule::Kind::top_k);
  CHECK(cfg.grids.at(Family::elastic_net).front().values == std::vector<double>{0.1, 1.0});
  CHECK(cfg.rul_cap == 125.0);
  try {
    parse_run_config("seed = 1\nnot.a.key = 3\n", "my.cfg");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("my.cfg:2") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_run_config("rf.seed = 3\n"), Error);
  CHECK_THROWS_AS(parse_run_config("grid.enet.bogus = 1\n"), Error);
  CHECK_THROWS_AS(parse_run_config("split.test_fraction = 1.5\n"), Error);
  CHECK(describe_keys().size() > 10);
}

TEST_CASE("simulate is reproducible") {
  const fs::path a = scratch() / "a.txt", b = scratch() / "b.txt", c = scratch() / "c.txt";
  REQUIRE(run_binary("simulate --units 4 --seed 11 -o " + a.string()).code == 0);
  REQUIRE(run_binary("simulate --units 4 --seed 11 -o " + b.string()).code == 0);
  REQUIRE(run_binary("simulate --units 4 --seed 12 -o " + c.string()).code == 0);
  const std::string text = slurp(a);
  CHECK(text == slurp(b));
  CHECK(text != slurp(c));
  std::istringstream in(text);
  std::size_t lines = 0;
  for (std::string line; std::getline(in, line); ++lines) {
    std::istringstream fields(line);
    std::size_t n = 0;
    for (std::string f; fields >> f;) ++n;
    CHECK(n == 26);
  }
  CHECK(lines == read_cmapss(a.string()).size());
}

TEST_CASE("train writes every family and a report") {
  const fs::path& d = trained();
  for (Family f : all_families()) CHECK(fs::exists(d / ("model_" + family_tag(f) + ".json")));
  const auto report = read_json(d / "report.json");
  CHECK(report.at("models").size() == 5);
  CHECK(report.at("stage_seeds").contains("split"));
  CHECK(fs::exists(d / "selection.json"));
  CHECK(fs::exists(d / "scaler.json"));

  const Result eval = run_binary("evaluate --data " + data_file().string() + " --out " + d.string() + " --model rf");
  CHECK(eval.code == 0);
  const auto ev = read_json(d / "evaluation.json");
  CHECK(ev.dump().find("mse") != std::string::npos);
}

TEST_CASE("missing data file names the path") {
  const Result r = run_binary("train --data /no/such/engines.txt --out " + (scratch() / "x").string());
  CHECK(r.code != 0);
  CHECK(r.output.find("/no/such/engines.txt") != std::string::npos);
}

TEST_CASE("bad usage exits with 2") {
  CHECK(run_binary("explain --method magic --model rf").code == kExitUsage);
  CHECK(run_binary("frobnicate").code == kExitUsage);
  CHECK(run_binary("train --set nonsense=1 --out " + (scratch() / "y").string()).code == kExitUsage);
}

TEST_CASE("lime and shap agree on the prediction, shap adds up") {
  const std::string base = "explain --data " + data_file().string() + " --out " + trained().string() + " --model gbm --row 5";
  const fs::path lime = scratch() / "lime_row5", shap = scratch() / "shap_row5";
  REQUIRE(run_binary(base + " --method lime -o " + lime.string()).code == 0);
  const Result r = run_binary(base + " --method shap --style force -o " + shap.string());
  REQUIRE(r.code == 0);
  CHECK(r.output.find("predicted value:") != std::string::npos);
  const auto l = read_json(lime.string() + ".json"), s = read_json(shap.string() + ".json");
  CHECK(l.at("predicted_value").get<double>() == s.at("predicted_value").get<double>());
  double total = s.at("base_value").get<double>();
  for (const auto& c : s.at("contributions")) total += c.at("value").get<double>();
  CHECK(std::abs(total - s.at("predicted_value").get<double>()) < 1e-6);
  CHECK(s.at("metadata").at("row") == 5);
  CHECK(fs::exists(shap.string() + ".svg"));
  CHECK(slurp(shap.string() + ".svg").find("<svg") == 0);
}

TEST_CASE("exact shapley is refused past 12 features and runs below") {
  const std::string train = "train --data " + data_file().string() + kQuick + " --set models=enet";
  const std::string explain = "explain --data " + data_file().string() + " --row 2 --method exact --style text";

  const fs::path wide = scratch() / "wide";
  REQUIRE(run_binary(train + " --out " + wide.string() + " --set select.rule=none").code == 0);
  const Result refused = run_binary(explain + " --out " + wide.string() + " --model enet");
  CHECK(refused.code == kExitRefused);
  CHECK(refused.output.find("refused") != std::string::npos);

  const fs::path narrow = scratch() / "narrow";
  REQUIRE(run_binary(train + " --out " + narrow.string() + " --set select.rule=top_k --set select.value=8").code == 0);
  const Result r = run_binary(explain + " --out " + narrow.string() + " --model enet -o " + (narrow / "exact").string());
  INFO(r.output);
  CHECK(r.code == 0);
  const auto e = read_json(narrow / "exact.json");
  CHECK(e.at("contributions").size() == 8);
  CHECK(fs::exists(narrow / "exact.txt"));
}

TEST_CASE("model files from another version are refused") {
  auto model = read_json(trained() / "model_enet.json");
  model["version"] = 99;
  const fs::path bad = scratch() / "model_v99.json";
  std::ofstream(bad) << model.dump();
  const Result r = run_binary("explain --data " + data_file().string() + " --model-file " + bad.string());
  CHECK(r.code == kExitModelFile);
  CHECK(r.output.find("99") != std::string::npos);
}

TEST_CASE("row out of range is a usage error") {
  const Result r = run_binary("explain --data " + data_file().string() + " --out " + trained().string() +
                              " --model enet --row 999999");
  CHECK(r.code == kExitUsage);
  CHECK(r.output.find("999999") != std::string::npos);
}

TEST_CASE("rank-features and grid-search write their artifacts") {
  const fs::path d = scratch() / "aux";
  CHECK(run_binary("rank-features --data " + data_file().string() + " --out " + d.string()).code == 0);
  CHECK(read_json(d / "ranking.json").dump().find("sensor-4") != std::string::npos);
  const Result g = run_binary("grid-search --data " + data_file().string() + " --out " + d.string() +
                              " --model enet --set grid.enet.alpha=0.01,1,100");
  INFO(g.output);
  CHECK(g.code == 0);
  CHECK(fs::exists(d / "grid_enet.json"));
  CHECK(fs::exists(d / "grid_enet.csv"));
  CHECK(run_binary("grid-search --data " + data_file().string() + " --out " + d.string() + " --model rf").code ==
        kExitUsage);
}
