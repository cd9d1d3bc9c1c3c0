#include <doctest.h>

#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "dann/data.hpp"
#include "dann/param_io.hpp"
#include "test_util.hpp"

namespace fs = std::filesystem;

namespace {

/// Runs the CLI with `args`, stdout and stderr captured into files under
/// `dir`. Returns the exit status.
int run_cli(const fs::path& dir, const std::string& args) {
  const std::string cmd = std::string("\"") + DANN_CLI_PATH + "\" " + args + " > \"" +
                          (dir / "stdout.txt").string() + "\" 2> \"" + (dir / "stderr.txt").string() +
                          "\"";
  const int status = std::system(cmd.c_str());
  REQUIRE(WIFEXITED(status));
  return WEXITSTATUS(status);
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& text) { std::ofstream(path) << text; }

const char* kTinyConfig = R"({
  "train": {"lr": 0.01, "batch_size": 64, "max_epochs": 4, "seed": 5},
  "simulation": {"model": 2, "n_train": 80, "n_val": 30, "n_test": 30, "samples": 2},
  "grids": [
    {"kind": "DNN", "L": [1, 2], "p": [3], "sigma": ["relu"]},
    {"kind": "HDANN1", "L": [1], "p": [2, 3], "q": [2], "sigma": ["tanh"], "basis": ["poly", "cos"]}
  ]
})";

}  // namespace

TEST_CASE("simulate writes a reproducible dataset") {
  const auto dir = test_util::scratch_dir("cli_simulate");
  CHECK(run_cli(dir, "simulate --model 1 --n 25 --seed 4 --out " + (dir / "a.csv").string()) == 0);
  CHECK(run_cli(dir, "simulate --model 1 --n 25 --seed 4 --out " + (dir / "b.csv").string()) == 0);
  CHECK(slurp(dir / "a.csv") == slurp(dir / "b.csv"));
  const auto data = dann::load_csv(dir / "a.csv", "y");
  CHECK(data.size() == 25);
  CHECK(data.dims() == 6);
  CHECK(data.y == dann::gen_model(1, 25, 4).y);
  CHECK(run_cli(dir, "simulate --model 3 --n 25 --out " + (dir / "c.csv").string()) == 2);
}

TEST_CASE("paramcount") {
  const auto dir = test_util::scratch_dir("cli_paramcount");
  CHECK(run_cli(dir, "paramcount --kind DNN --d 6 --L 14 --p 128") == 0);
  CHECK(slurp(dir / "stdout.txt") == "215681\n");
  write_file(dir / "spec.json", R"({"kind": "HDANN2", "d": 8, "L": 5, "p": 1024, "q": 3})");
  CHECK(run_cli(dir, "paramcount --spec " + (dir / "spec.json").string()) == 0);
  CHECK(slurp(dir / "stdout.txt") == "4210689\n");
  CHECK(run_cli(dir, "paramcount --kind DANN --d 6 --L 1 --p 4 --q 0") == 2);
  CHECK(run_cli(dir, "paramcount --kind MLP --d 6 --L 1 --p 4") == 2);
}

TEST_CASE("configuration and data errors map to exit codes") {
  const auto dir = test_util::scratch_dir("cli_errors");
  CHECK(run_cli(dir, "") == 2);
  CHECK(run_cli(dir, "grid --preset huge --out " + dir.string()) == 2);
  CHECK(run_cli(dir, "grid --config " + (dir / "absent.json").string()) == 2);
  write_file(dir / "broken.json", "{\"train\": {\"lr\": -1}}");
  CHECK(run_cli(dir, "grid --config " + (dir / "broken.json").string()) == 2);
  CHECK(run_cli(dir, "kfold --data " + (dir / "absent.csv").string() + " --response y") == 3);
  CHECK(run_cli(dir, std::string("kfold --data ") + DANN_FIXTURE_DIR + "/housing50.csv --response price") == 3);
  CHECK(slurp(dir / "stderr.txt").find("price") != std::string::npos);
}

TEST_CASE("a diverging run is recorded as failed with exit code 4") {
  const auto dir = test_util::scratch_dir("cli_partial");
  write_file(dir / "c.json", R"({
    "train": {"lr": 1e300, "max_epochs": 3},
    "simulation": {"n_train": 40, "n_val": 10, "n_test": 10, "samples": 1},
    "grids": [{"kind": "DNN", "L": [1], "p": [16], "sigma": ["relu"]}]})");
  CHECK(run_cli(dir, "grid --config " + (dir / "c.json").string() + " --out " + (dir / "out").string()) == 4);
  CHECK(slurp(dir / "out/records.csv").find(",nan,nan,") != std::string::npos);
}

TEST_CASE("grid output is byte-identical across runs and thread counts") {
  const auto dir = test_util::scratch_dir("cli_grid");
  write_file(dir / "c.json", kTinyConfig);
  const auto base = "grid --no-timing --config " + (dir / "c.json").string();
  REQUIRE(run_cli(dir, base + " --threads 1 --out " + (dir / "a").string()) == 0);
  REQUIRE(run_cli(dir, base + " --threads 1 --out " + (dir / "b").string()) == 0);
  REQUIRE(run_cli(dir, base + " --threads 4 --out " + (dir / "c").string()) == 0);
  for (const auto* file : {"records.csv", "selection.csv", "summary.csv", "plotdata.csv"}) {
    CHECK(slurp(dir / "a" / file) == slurp(dir / "b" / file));
    CHECK(slurp(dir / "a" / file) == slurp(dir / "c" / file));
  }
  const auto records = slurp(dir / "a/records.csv");
  CHECK(std::count(records.begin(), records.end(), '\n') == 1 + 2 * (2 + 4));

  // report rebuilds the derived files from records.csv alone.
  REQUIRE(run_cli(dir, "report --d 6 --records " + (dir / "a/records.csv").string() + " --out " +
                           (dir / "r").string()) == 0);
  CHECK(slurp(dir / "r/selection.csv") == slurp(dir / "a/selection.csv"));
  CHECK(slurp(dir / "r/summary.csv") == slurp(dir / "a/summary.csv"));

  // A different seed changes the outcome.
  REQUIRE(run_cli(dir, base + " --seed 99 --out " + (dir / "d").string()) == 0);
  CHECK(slurp(dir / "d/records.csv") != records);
}

TEST_CASE("kfold on the housing fixture") {
  const auto dir = test_util::scratch_dir("cli_kfold");
  write_file(dir / "c.json", R"({
    "train": {"lr": 0.01, "max_epochs": 3},
    "grids": [{"kind": "DNN", "L": [1], "p": [3], "sigma": ["relu"]},
              {"kind": "DANN", "L": [1], "p": [3], "q": [2], "sigma": ["relu"], "basis": ["cos"]}]})");
  CHECK(run_cli(dir, std::string("kfold --k 3 --log-response --response MedHouseVal --data ") +
                         DANN_FIXTURE_DIR + "/housing50.csv --config " + (dir / "c.json").string() +
                         " --out " + (dir / "out").string()) == 0);
  const auto records = slurp(dir / "out/records.csv");
  CHECK(std::count(records.begin(), records.end(), '\n') == 1 + 3 * 2);
}

TEST_CASE("fit trains one network and saves loadable parameters") {
  const auto dir = test_util::scratch_dir("cli_fit");
  write_file(dir / "spec.json", R"({"kind": "HDANN3", "d": 3, "L": 2, "p": 4, "q": 3, "basis": "cos"})");
  write_file(dir / "c.json", R"({"train": {"lr": 0.01, "max_epochs": 20, "batch_size": 8}})");
  const auto args = "fit --spec " + (dir / "spec.json").string() + " --data " + DANN_FIXTURE_DIR +
                    "/small20.csv --response y --config " + (dir / "c.json").string() + " --out " +
                    (dir / "p.json").string();
  REQUIRE(run_cli(dir, args + " --portable") == 0);
  const auto summary = nlohmann::json::parse(slurp(dir / "stdout.txt"));
  CHECK(summary.at("final_mse").get<double>() < summary.at("initial_mse").get<double>());
  const auto params = dann::load_params(dir / "p.json");
  CHECK(params.spec().kind == dann::NetworkKind::HDANN3);
  CHECK(params.size() == dann::param_count(params.spec()));
  CHECK_FALSE(fs::exists(dir / "p.json.bin"));
}
