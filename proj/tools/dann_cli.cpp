// Command-line front end: dataset simulation, grid studies, k-fold studies,
// report regeneration, parameter counting and single-model fitting.
//
// Exit codes: 0 success, 2 configuration error, 3 data error, 4 some runs
// failed.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "dann/data.hpp"
#include "dann/errors.hpp"
#include "dann/harness.hpp"
#include "dann/network.hpp"
#include "dann/param_io.hpp"
#include "dann/report.hpp"
#include "dann/training.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitPartial = 4;

struct StudyFlags {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir = "out";
  std::size_t threads = 1;
  std::string preset = "desk";
  std::vector<std::string> kinds;
  std::optional<int> max_epochs;
  bool no_timing = false;
};

void add_study_flags(CLI::App& cmd, StudyFlags& f) {
  cmd.add_option("--config", f.config_path, "JSON config (train, grids, simulation)");
  cmd.add_option("--seed", f.seed, "Global seed (overrides config)");
  cmd.add_option("--out", f.out_dir, "Output directory")->capture_default_str();
  cmd.add_option("--threads", f.threads, "Concurrent runs")->capture_default_str();
  cmd.add_option("--preset", f.preset, "Grid preset when the config has no grids: desk or paper")
      ->capture_default_str();
  cmd.add_option("--kinds", f.kinds, "Network kinds to run (default: all five)")->delimiter(',');
  cmd.add_option("--max-epochs", f.max_epochs, "Epoch cap (overrides config)");
  cmd.add_flag("--no-timing", f.no_timing, "Write 0 for training time so output is byte-stable");
}

nlohmann::json read_json(const std::string& path) {
  if (path.empty()) return nlohmann::json::object();
  std::ifstream in(path);
  if (!in) throw dann::ConfigError(fmt::format("cannot open config {}", path));
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw dann::ConfigError(fmt::format("{}: {}", path, e.what()));
  }
}

dann::TrainConfig train_config(const nlohmann::json& config, const StudyFlags& f) {
  dann::TrainConfig train;
  if (config.contains("train")) train = config.at("train").get<dann::TrainConfig>();
  if (f.seed) train.seed = *f.seed;
  if (f.max_epochs) train.max_epochs = *f.max_epochs;
  train.validate();
  return train;
}

std::vector<dann::GridSpec> grids(const nlohmann::json& config, const StudyFlags& f, int d) {
  std::vector<dann::GridSpec> out;
  if (config.contains("grids")) {
    for (const auto& g : config.at("grids")) out.push_back(g.get<dann::GridSpec>());
  } else {
    const auto preset = dann::parse_preset(config.value("preset", f.preset));
    if (preset == dann::GridPreset::Paper)
      std::cerr << "warning: paper grids train 3135 networks per sample; expect a very long run\n";
    for (const auto kind : dann::kAllNetworkKinds) out.push_back(dann::preset_grid(preset, kind, d));
  }
  if (!f.kinds.empty()) {
    std::vector<dann::NetworkKind> keep;
    for (const auto& k : f.kinds) keep.push_back(dann::parse_network_kind(k));
    std::erase_if(out, [&](const dann::GridSpec& g) {
      return std::find(keep.begin(), keep.end(), g.kind) == keep.end();
    });
  }
  if (out.empty()) throw dann::ConfigError("no grids selected");
  return out;
}

int finish(const dann::ReportBundle& bundle, const std::string& out_dir) {
  dann::emit_report(bundle, out_dir);
  std::cout << fmt::format("{} runs written to {}\n", bundle.records.size(), out_dir);
  for (const auto& row : bundle.summary)
    std::cout << fmt::format("  {}-{}: avg test error {} (avg params {}, {} samples)\n",
                             dann::to_string(row.kind), row.selection,
                             row.avg_test_error ? fmt::format("{:.5f}", *row.avg_test_error) : "NA",
                             row.avg_n_params ? fmt::format("{:.1f}", *row.avg_n_params) : "NA",
                             row.samples);
  if (bundle.any_failed()) {
    std::cerr << "some runs failed; see nan rows in records.csv\n";
    return kExitPartial;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Deep additive neural networks: simulation, grid search and reporting"};
  app.require_subcommand(1);

  // simulate
  int sim_model = 1;
  std::size_t sim_n = 1000;
  std::uint64_t sim_seed = 0;
  std::string sim_out;
  auto* simulate = app.add_subcommand("simulate", "Write a synthetic dataset (columns x1..x6,y)");
  simulate->add_option("--model", sim_model, "1 or 2")->required()->check(CLI::IsMember({1, 2}));
  simulate->add_option("--n", sim_n, "Rows")->required()->check(CLI::PositiveNumber);
  simulate->add_option("--seed", sim_seed, "Seed")->capture_default_str();
  simulate->add_option("--out", sim_out, "Output CSV")->required();

  // grid
  StudyFlags grid_flags;
  std::optional<int> grid_model;
  std::optional<std::size_t> n_train, n_val, n_test;
  std::optional<int> samples;
  auto* grid = app.add_subcommand("grid", "Monte-Carlo simulation study over hyperparameter grids");
  add_study_flags(*grid, grid_flags);
  grid->add_option("--model", grid_model, "Simulation model (1 or 2)");
  grid->add_option("--n-train", n_train, "Training rows per sample");
  grid->add_option("--n-val", n_val, "Validation rows per sample");
  grid->add_option("--n-test", n_test, "Test rows per sample");
  grid->add_option("--samples", samples, "Monte-Carlo samples");

  // kfold
  StudyFlags kfold_flags;
  std::string data_path, response;
  bool log_response = false;
  std::size_t k = 5;
  auto* kfold = app.add_subcommand("kfold", "k-fold study on a CSV dataset");
  add_study_flags(*kfold, kfold_flags);
  kfold->add_option("--data", data_path, "Input CSV")->required();
  kfold->add_option("--response", response, "Response column")->required();
  kfold->add_flag("--log-response", log_response, "Use the natural log of the response");
  kfold->add_option("--k", k, "Folds")->capture_default_str();

  // report
  std::string records_path, report_out = "out";
  int report_d = 6;
  auto* report = app.add_subcommand("report", "Rebuild selection/summary/plot files from records.csv");
  report->add_option("--records", records_path, "records.csv")->required();
  report->add_option("--out", report_out, "Output directory")->capture_default_str();
  report->add_option("--d", report_d, "Input dimension of the recorded runs")->capture_default_str();

  // paramcount
  std::string pc_spec, pc_kind = "DNN";
  int pc_d = 6, pc_L = 1, pc_p = 1, pc_q = 0;
  auto* paramcount = app.add_subcommand("paramcount", "Print the parameter count of a network");
  paramcount->add_option("--spec", pc_spec, "Network spec JSON file");
  paramcount->add_option("--kind", pc_kind, "DNN, DANN, HDANN1, HDANN2 or HDANN3");
  paramcount->add_option("--d", pc_d);
  paramcount->add_option("--L", pc_L);
  paramcount->add_option("--p", pc_p);
  paramcount->add_option("--q", pc_q);

  // fit
  std::string fit_spec, fit_data, fit_response, fit_out, fit_config;
  bool fit_log = false, portable = false;
  auto* fit = app.add_subcommand("fit", "Train one network on a CSV file and save its parameters");
  fit->add_option("--spec", fit_spec, "Network spec JSON file")->required();
  fit->add_option("--data", fit_data, "Training CSV")->required();
  fit->add_option("--response", fit_response, "Response column")->required();
  fit->add_flag("--log-response", fit_log);
  fit->add_option("--config", fit_config, "JSON config with a \"train\" object");
  fit->add_option("--out", fit_out, "Parameter file")->required();
  fit->add_flag("--portable", portable, "Single JSON file instead of header + binary sidecar");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (simulate->parsed()) {
      dann::write_csv(sim_out, dann::gen_model(sim_model, sim_n, sim_seed));
      return 0;
    }

    if (grid->parsed()) {
      const auto config = read_json(grid_flags.config_path);
      const auto train = train_config(config, grid_flags);
      dann::SimulationStudy study;
      const auto sim = config.value("simulation", nlohmann::json::object());
      study.model_id = grid_model.value_or(sim.value("model", study.model_id));
      study.n_train = n_train.value_or(sim.value("n_train", study.n_train));
      study.n_val = n_val.value_or(sim.value("n_val", study.n_val));
      study.n_test = n_test.value_or(sim.value("n_test", study.n_test));
      study.n_monte_carlo = samples.value_or(sim.value("samples", study.n_monte_carlo));
      dann::RunOptions options;
      options.threads = grid_flags.threads;
      options.record_time = !grid_flags.no_timing;
      const auto g = grids(config, grid_flags, 6);
      return finish(dann::run_simulation_study(study, g, train, options), grid_flags.out_dir);
    }

    if (kfold->parsed()) {
      const auto config = read_json(kfold_flags.config_path);
      const auto train = train_config(config, kfold_flags);
      const auto data = dann::load_csv(data_path, response, log_response);
      dann::RunOptions options;
      options.threads = kfold_flags.threads;
      options.record_time = !kfold_flags.no_timing;
      const auto g = grids(config, kfold_flags, static_cast<int>(data.dims()));
      return finish(dann::run_kfold_study(data, k, g, train, options), kfold_flags.out_dir);
    }

    if (report->parsed()) {
      dann::ReportBundle bundle;
      bundle.records = dann::parse_records_csv(records_path, report_d);
      dann::summarize(bundle);
      dann::emit_report(bundle, report_out);
      return 0;
    }

    if (paramcount->parsed()) {
      dann::NetworkSpec spec;
      if (!pc_spec.empty()) {
        spec = read_json(pc_spec).get<dann::NetworkSpec>();
      } else {
        spec.kind = dann::parse_network_kind(pc_kind);
        spec.d = pc_d;
        spec.L = pc_L;
        spec.p = pc_p;
        spec.q = pc_q;
      }
      spec.validate();
      std::cout << dann::param_count(spec) << '\n';
      return 0;
    }

    if (fit->parsed()) {
      const auto spec = read_json(fit_spec).get<dann::NetworkSpec>();
      const auto config = read_json(fit_config);
      const auto train_cfg = config.contains("train") ? config.at("train").get<dann::TrainConfig>()
                                                      : dann::TrainConfig{};
      const auto data = dann::load_csv(fit_data, fit_response, fit_log);
      data.validate();
      const auto scaler_x = dann::ScalerX::fit(data.X);
      const auto scaler_y = dann::ScalerY::fit(data.y);
      if (static_cast<std::size_t>(spec.d) != data.dims())
        throw dann::ConfigError(fmt::format("spec d = {} but data has {} features", spec.d, data.dims()));
      auto result = dann::train(dann::init_xavier(spec, train_cfg.seed), scaler_x.apply(data.X),
                                scaler_y.apply(data.y), train_cfg);
      dann::save_params(fit_out, result.params, portable);
      nlohmann::json summary{{"epochs_run", result.report.epochs_run},
                             {"stop_reason", dann::to_string(result.report.stop_reason)},
                             {"initial_mse", result.report.initial_mse},
                             {"final_mse", result.report.epoch_mse.back()},
                             {"scaler_x", {{"min", scaler_x.min}, {"max", scaler_x.max}}},
                             {"scaler_y", {{"mean", scaler_y.mean}, {"sd", scaler_y.sd}}}};
      std::cout << summary.dump(2) << '\n';
      return 0;
    }
  } catch (const dann::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const dann::DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const dann::TrainingError& e) {
    std::cerr << "training error: " << e.what() << '\n';
    return kExitPartial;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
