#include "dann/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <thread>

#include <fmt/format.h>

#include "dann/errors.hpp"
#include "dann/rng.hpp"

namespace dann {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

template <typename T>
void require_non_empty(const std::vector<T>& values, std::string_view name) {
  if (values.empty()) throw ConfigError(fmt::format("grid list '{}' is empty", name));
}

std::vector<ActivationKind> parse_activations(const nlohmann::json& j) {
  std::vector<ActivationKind> out;
  for (const auto& v : j) out.push_back(parse_activation(v.get<std::string>()));
  return out;
}

std::vector<BasisFamily> parse_bases(const nlohmann::json& j) {
  std::vector<BasisFamily> out;
  for (const auto& v : j) out.push_back(parse_basis(v.get<std::string>()));
  return out;
}

RunRecord run_one(const NetworkSpec& spec, std::uint64_t seed, const PreparedSplit& split,
                  const TrainConfig& base_config, const RunOptions& options) {
  RunRecord record;
  record.spec = spec;
  record.n_params = param_count(spec);
  record.seed = seed;
  record.sample_id = options.sample_id;

  TrainConfig config = base_config;
  config.seed = seed;
  try {
    auto result = train(init_xavier(spec, seed), split.train_X, split.train_y_std, config);
    const auto val_pred = split.scaler_y.invert(predict(result.params, split.val_X));
    const auto test_pred = split.scaler_y.invert(predict(result.params, split.test_X));
    record.validation_error = loss_mse(val_pred, split.val_y);
    record.test_error = loss_mse(test_pred, split.test_y);
    if (!std::isfinite(record.validation_error) || !std::isfinite(record.test_error))
      throw TrainingError("non-finite prediction error");
    record.training_time_sec = options.record_time ? result.report.wall_time_sec : 0.0;
  } catch (const std::exception&) {
    record.validation_error = kNaN;
    record.test_error = kNaN;
    record.training_time_sec = 0.0;
  }
  return record;
}

std::vector<NetworkSpec> expand_unchecked(const GridSpec& grid) {
  const bool dnn = grid.kind == NetworkKind::DNN;
  const std::vector<int> qs = dnn ? std::vector<int>{0} : grid.q;
  const std::vector<BasisFamily> bases =
      dnn ? std::vector<BasisFamily>{BasisFamily::Polynomial} : grid.basis;

  std::vector<NetworkSpec> specs;
  for (const int L : grid.L)
    for (const int p : grid.p)
      for (const int q : qs)
        for (const auto sigma : grid.sigma)
          for (const auto basis : bases) {
            NetworkSpec spec;
            spec.kind = grid.kind;
            spec.d = grid.d;
            spec.L = L;
            spec.p = p;
            spec.q = q;
            spec.sigma = sigma;
            spec.g = grid.g;
            spec.basis = basis;
            specs.push_back(spec);
          }
  return specs;
}

}  // namespace

void GridSpec::validate() const {
  if (d < 1) throw ConfigError(fmt::format("grid d must be >= 1, got {}", d));
  require_non_empty(L, "L");
  require_non_empty(p, "p");
  require_non_empty(sigma, "sigma");
  if (kind != NetworkKind::DNN) {
    require_non_empty(q, "q");
    require_non_empty(basis, "basis");
  }
  for (const auto spec : expand_unchecked(*this)) spec.validate();
}

void to_json(nlohmann::json& j, const GridSpec& grid) {
  std::vector<std::string> sigma, basis;
  for (const auto s : grid.sigma) sigma.emplace_back(to_string(s));
  for (const auto b : grid.basis) basis.emplace_back(to_string(b));
  j = nlohmann::json{{"kind", to_string(grid.kind)}, {"d", grid.d},         {"L", grid.L},
                     {"p", grid.p},                  {"q", grid.q},         {"sigma", sigma},
                     {"basis", basis},               {"g", to_string(grid.g)}};
}

void from_json(const nlohmann::json& j, GridSpec& grid) {
  try {
    grid.kind = parse_network_kind(j.at("kind").get<std::string>());
    grid.d = j.value("d", grid.d);
    grid.L = j.at("L").get<std::vector<int>>();
    grid.p = j.at("p").get<std::vector<int>>();
    grid.q = j.value("q", std::vector<int>{});
    grid.sigma = parse_activations(j.at("sigma"));
    grid.basis = j.contains("basis") ? parse_bases(j.at("basis")) : std::vector<BasisFamily>{};
    grid.g = parse_activation(j.value("g", std::string("sigmoid")));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(fmt::format("grid: {}", e.what()));
  }
}

GridPreset parse_preset(std::string_view name) {
  if (name == "desk") return GridPreset::Desk;
  if (name == "paper") return GridPreset::Paper;
  throw ConfigError(fmt::format("unknown preset '{}' (expected desk or paper)", name));
}

GridSpec preset_grid(GridPreset preset, NetworkKind kind, int d) {
  GridSpec grid;
  grid.kind = kind;
  grid.d = d;
  const bool dnn = kind == NetworkKind::DNN;
  if (preset == GridPreset::Desk) {
    grid.L = {1, 3};
    grid.p = {4, 16};
    grid.sigma = {ActivationKind::ReLU};
    if (!dnn) {
      grid.q = {3, 5};
      grid.basis = {BasisFamily::Polynomial, BasisFamily::Cosine};
    }
    return grid;
  }
  grid.sigma = {ActivationKind::Logistic, ActivationKind::ReLU, ActivationKind::Tanh};
  if (dnn) {
    for (int t = 1; t <= 9; ++t) grid.L.push_back(2 * t);
    for (const int t : {3, 5, 7, 9, 11}) grid.p.push_back(1 << t);
  } else {
    grid.L = {1, 3, 5, 7, 9};
    for (const int t : {2, 4, 6, 8, 10}) grid.p.push_back(1 << t);
    grid.q = {3, 5, 7, 9, 11};
    grid.basis = {BasisFamily::Polynomial, BasisFamily::Cosine};
  }
  return grid;
}

std::vector<NetworkSpec> expand_grid(const GridSpec& grid) {
  grid.validate();
  return expand_unchecked(grid);
}

bool RunRecord::failed() const {
  return !std::isfinite(validation_error) || !std::isfinite(test_error);
}

PreparedSplit prepare_split(const Dataset& train, const Dataset& val, const Dataset& test,
                            const ScalerX* scaler_x) {
  train.validate();
  val.validate();
  test.validate();
  PreparedSplit split;
  split.train_X = scaler_x ? scaler_x->apply(train.X) : train.X;
  split.val_X = scaler_x ? scaler_x->apply(val.X) : val.X;
  split.test_X = scaler_x ? scaler_x->apply(test.X) : test.X;
  split.train_y = train.y;
  split.val_y = val.y;
  split.test_y = test.y;
  split.scaler_y = ScalerY::fit(train.y);
  split.train_y_std = split.scaler_y.apply(train.y);
  return split;
}

std::uint64_t run_seed(std::uint64_t global_seed, int sample_id, NetworkKind kind,
                       std::size_t spec_index) {
  return derive_seed(global_seed, "run",
                     {static_cast<std::uint64_t>(sample_id), static_cast<std::uint64_t>(kind),
                      static_cast<std::uint64_t>(spec_index)});
}

std::vector<RunRecord> run_grid(std::span<const NetworkSpec> specs, const PreparedSplit& split,
                                const TrainConfig& config, const RunOptions& options) {
  config.validate();
  for (const auto& spec : specs) {
    spec.validate();
    if (static_cast<std::size_t>(spec.d) != split.train_X.cols())
      throw ConfigError(fmt::format("{} spec has d = {} but the data has {} features",
                                    to_string(spec.kind), spec.d, split.train_X.cols()));
  }

  std::vector<RunRecord> records(specs.size());
  auto work = [&](std::size_t i) {
    const auto seed = run_seed(config.seed, options.sample_id, specs[i].kind, i);
    records[i] = run_one(specs[i], seed, split, config, options);
  };

  const std::size_t threads = std::min(std::max<std::size_t>(options.threads, 1), specs.size());
  if (threads <= 1) {
    for (std::size_t i = 0; i < specs.size(); ++i) work(i);
    return records;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  pool.reserve(threads);
  for (std::size_t t = 0; t < threads; ++t)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < specs.size(); i = next++) work(i);
    });
  pool.clear();  // joins
  return records;
}

std::optional<RunRecord> select_best(std::span<const RunRecord> records) {
  const RunRecord* best = nullptr;
  for (const auto& r : records) {
    if (r.failed()) continue;
    if (!best || r.validation_error < best->validation_error ||
        (r.validation_error == best->validation_error && r.n_params < best->n_params))
      best = &r;
  }
  if (!best) return std::nullopt;
  return *best;
}

std::optional<RunRecord> select_small(std::span<const RunRecord> records, double dnn_best_val) {
  const RunRecord* small = nullptr;
  for (const auto& r : records) {
    if (r.failed() || !(r.validation_error < dnn_best_val)) continue;
    if (!small || r.n_params < small->n_params ||
        (r.n_params == small->n_params && r.validation_error < small->validation_error))
      small = &r;
  }
  if (!small) return std::nullopt;
  return *small;
}

bool ReportBundle::any_failed() const {
  return std::any_of(records.begin(), records.end(), [](const RunRecord& r) { return r.failed(); });
}

void summarize(ReportBundle& bundle) {
  bundle.selections.clear();
  bundle.summary.clear();

  // sample -> kind -> records, each list in original order.
  std::map<int, std::map<NetworkKind, std::vector<RunRecord>>> groups;
  for (const auto& r : bundle.records) groups[r.sample_id][r.spec.kind].push_back(r);

  for (const auto& [sample_id, by_kind] : groups) {
    std::optional<double> dnn_best_val;
    if (const auto it = by_kind.find(NetworkKind::DNN); it != by_kind.end())
      if (const auto best = select_best(it->second)) dnn_best_val = best->validation_error;

    for (const auto& [kind, records] : by_kind) {
      SampleSelection sel;
      sel.sample_id = sample_id;
      sel.kind = kind;
      sel.best = select_best(records);
      if (kind != NetworkKind::DNN && dnn_best_val) sel.small = select_small(records, *dnn_best_val);
      bundle.selections.push_back(std::move(sel));
    }
  }

  const bool have_dnn = std::any_of(bundle.records.begin(), bundle.records.end(),
                                    [](const RunRecord& r) { return r.spec.kind == NetworkKind::DNN; });
  for (const auto kind : kAllNetworkKinds) {
    for (const std::string which : {"best", "small"}) {
      const bool small = which == "small";
      if (small && (kind == NetworkKind::DNN || !have_dnn)) continue;
      SummaryRow row;
      row.kind = kind;
      row.selection = which;
      double err_sum = 0.0, param_sum = 0.0;
      bool present = false;
      for (const auto& sel : bundle.selections) {
        if (sel.kind != kind) continue;
        present = true;
        const auto& pick = small ? sel.small : sel.best;
        if (!pick) continue;
        err_sum += pick->test_error;
        param_sum += static_cast<double>(pick->n_params);
        ++row.samples;
      }
      if (!present) continue;
      if (row.samples > 0) {
        row.avg_test_error = err_sum / row.samples;
        row.avg_n_params = param_sum / row.samples;
      }
      bundle.summary.push_back(row);
    }
  }
}

namespace {

std::vector<GridSpec> with_dimension(std::span<const GridSpec> grids, int d) {
  std::vector<GridSpec> out(grids.begin(), grids.end());
  for (auto& g : out) {
    g.d = d;
    g.validate();
  }
  return out;
}

void run_all_grids(ReportBundle& bundle, std::span<const GridSpec> grids,
                   const PreparedSplit& split, const TrainConfig& config,
                   const RunOptions& options) {
  for (const auto& grid : grids) {
    const auto specs = expand_grid(grid);
    auto records = run_grid(specs, split, config, options);
    bundle.records.insert(bundle.records.end(), std::make_move_iterator(records.begin()),
                          std::make_move_iterator(records.end()));
  }
}

}  // namespace

ReportBundle run_simulation_study(const SimulationStudy& study, std::span<const GridSpec> grids,
                                  const TrainConfig& config, const RunOptions& options) {
  if (study.n_monte_carlo < 1) throw ConfigError("n_monte_carlo must be >= 1");
  if (study.n_train < 2 || study.n_val < 1 || study.n_test < 1)
    throw ConfigError("simulation sizes must be positive (n_train >= 2)");
  const auto sized = with_dimension(grids, 6);

  ReportBundle bundle;
  for (int sample = 0; sample < study.n_monte_carlo; ++sample) {
    const auto s = static_cast<std::uint64_t>(sample);
    const auto train = gen_model(study.model_id, study.n_train, derive_seed(config.seed, "sim-train", {s}));
    const auto val = gen_model(study.model_id, study.n_val, derive_seed(config.seed, "sim-val", {s}));
    const auto test = gen_model(study.model_id, study.n_test, derive_seed(config.seed, "sim-test", {s}));
    const auto split = prepare_split(train, val, test);

    RunOptions sample_options = options;
    sample_options.sample_id = sample;
    run_all_grids(bundle, sized, split, config, sample_options);
  }
  summarize(bundle);
  return bundle;
}

ReportBundle run_kfold_study(const Dataset& data, std::size_t k, std::span<const GridSpec> grids,
                             const TrainConfig& config, const RunOptions& options) {
  data.validate();
  if (k < 2) throw ConfigError("k-fold study needs k >= 2");
  if (data.size() < 2 * k) throw DataError(fmt::format("{} rows are too few for {} folds", data.size(), k));
  const auto sized = with_dimension(grids, static_cast<int>(data.dims()));

  ReportBundle bundle;
  const auto folds = split_kfold(data.size(), k, derive_seed(config.seed, "folds"));
  for (std::size_t f = 0; f < k; ++f) {
    std::vector<std::size_t> rest;
    for (std::size_t g = 0; g < k; ++g)
      if (g != f) rest.insert(rest.end(), folds[g].begin(), folds[g].end());
    std::sort(rest.begin(), rest.end());

    FoldInfo info;
    info.fold = static_cast<int>(f);
    info.test = folds[f];
    auto tv = split_train_val(rest, derive_seed(config.seed, "fold-split", {f}));
    info.train = std::move(tv.train);
    info.val = std::move(tv.val);

    const auto train = data.subset(info.train);
    const auto val = data.subset(info.val);
    const auto test = data.subset(info.test);
    info.scaler_x = ScalerX::fit(train.X);
    const auto split = prepare_split(train, val, test, &info.scaler_x);
    info.scaler_y = split.scaler_y;

    RunOptions fold_options = options;
    fold_options.sample_id = static_cast<int>(f);
    run_all_grids(bundle, sized, split, config, fold_options);
    bundle.folds.push_back(std::move(info));
  }
  summarize(bundle);
  return bundle;
}

}  // namespace dann
