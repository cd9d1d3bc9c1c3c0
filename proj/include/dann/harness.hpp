#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "dann/data.hpp"
#include "dann/network.hpp"
#include "dann/training.hpp"

namespace dann {

/// Hyperparameter lists for one network kind. The grid is their Cartesian
/// product; q and basis are ignored for DNN.
struct GridSpec {
  NetworkKind kind = NetworkKind::DNN;
  int d = 6;
  std::vector<int> L;
  std::vector<int> p;
  std::vector<int> q;
  std::vector<ActivationKind> sigma;
  std::vector<BasisFamily> basis;
  ActivationKind g = ActivationKind::Logistic;

  /// Throws ConfigError on empty lists or out-of-range values.
  void validate() const;
};

void to_json(nlohmann::json& j, const GridSpec& grid);
/// "d" is optional; studies overwrite it with the data dimension.
void from_json(const nlohmann::json& j, GridSpec& grid);

enum class GridPreset { Desk, Paper };
[[nodiscard]] GridPreset parse_preset(std::string_view name);

/// Full grids (preset "paper"): DNN L in {2,4,...,18}, p in {8,32,128,512,2048}, three
/// activations (135 cells); other kinds L in {1,3,5,7,9}, p in
/// {4,16,64,256,1024}, q in {3,5,7,9,11}, three activations, polynomial and
/// cosine bases (750 cells).
///
/// Desk grids: L in {1,3}, p in {4,16}, q in {3,5}, ReLU, both bases.
[[nodiscard]] GridSpec preset_grid(GridPreset preset, NetworkKind kind, int d);

/// Lexicographic product with L outermost, then p, q, sigma, basis. DNN
/// specs carry q = 0 and the polynomial basis tag.
[[nodiscard]] std::vector<NetworkSpec> expand_grid(const GridSpec& grid);

/// One grid cell's outcome. Errors are mean squared errors in the original
/// response scale; a failed run has both set to NaN.
struct RunRecord {
  NetworkSpec spec;
  double validation_error = 0.0;
  double test_error = 0.0;
  double training_time_sec = 0.0;
  std::uint64_t n_params = 0;
  std::uint64_t seed = 0;
  int sample_id = 0;

  [[nodiscard]] bool failed() const;

  bool operator==(const RunRecord&) const = default;
};

/// Train / validation / test matrices ready for a grid run. Responses are
/// kept in the original scale; the training copy is also standardized.
struct PreparedSplit {
  Matrix train_X;
  Matrix val_X;
  Matrix test_X;
  std::vector<double> train_y;
  std::vector<double> val_y;
  std::vector<double> test_y;
  ScalerY scaler_y;
  std::vector<double> train_y_std;
};

/// Fits ScalerY on train.y and, when `scaler_x` is given, applies it to all
/// three feature matrices.
[[nodiscard]] PreparedSplit prepare_split(const Dataset& train, const Dataset& val,
                                          const Dataset& test,
                                          const ScalerX* scaler_x = nullptr);

struct RunOptions {
  std::size_t threads = 1;
  int sample_id = 0;
  bool record_time = true;  // false writes 0 so reports are byte-stable
};

/// Seed for one run, from the global seed, sample id and the cell's
/// position in its grid.
[[nodiscard]] std::uint64_t run_seed(std::uint64_t global_seed, int sample_id, NetworkKind kind,
                                     std::size_t spec_index);

/// Trains one network per spec and scores it. Records come back in spec
/// order whatever the thread count. A run that throws is recorded as failed
/// and the grid continues.
[[nodiscard]] std::vector<RunRecord> run_grid(std::span<const NetworkSpec> specs,
                                              const PreparedSplit& split,
                                              const TrainConfig& config,
                                              const RunOptions& options = {});

/// Lowest validation error; ties go to fewer parameters, then earlier
/// position. Failed records are skipped. Empty when nothing qualifies.
[[nodiscard]] std::optional<RunRecord> select_best(std::span<const RunRecord> records);

/// Fewest parameters among records with validation error strictly below
/// `dnn_best_val`; ties go to lower validation error, then earlier position.
[[nodiscard]] std::optional<RunRecord> select_small(std::span<const RunRecord> records,
                                                    double dnn_best_val);

struct SampleSelection {
  int sample_id = 0;
  NetworkKind kind = NetworkKind::DNN;
  std::optional<RunRecord> best;
  std::optional<RunRecord> small;  // never set for DNN
};

/// One averaged row: "<network>-best" or "<network>-small".
struct SummaryRow {
  NetworkKind kind = NetworkKind::DNN;
  std::string selection;  // "best" | "small"
  std::optional<double> avg_test_error;
  std::optional<double> avg_n_params;
  int samples = 0;  // samples contributing (NA selections excluded)
};

/// Scalers and indices used for one cross-validation fold.
struct FoldInfo {
  int fold = 0;
  std::vector<std::size_t> test;
  std::vector<std::size_t> train;
  std::vector<std::size_t> val;
  ScalerX scaler_x;
  ScalerY scaler_y;
};

struct ReportBundle {
  std::vector<RunRecord> records;
  std::vector<SampleSelection> selections;
  std::vector<SummaryRow> summary;
  std::vector<FoldInfo> folds;

  [[nodiscard]] bool any_failed() const;
};

/// Per-sample best/small selections and their averages, derived from the
/// records alone. Small selections need DNN records in the same sample.
void summarize(ReportBundle& bundle);

struct SimulationStudy {
  int model_id = 1;
  std::size_t n_train = 1000;
  std::size_t n_val = 500;
  std::size_t n_test = 500;
  int n_monte_carlo = 5;
};

/// Monte-Carlo study: fresh train/validation/test draws per sample, one
/// grid search per sample and kind. Features are already in [0,1] and are
/// not rescaled.
[[nodiscard]] ReportBundle run_simulation_study(const SimulationStudy& study,
                                                std::span<const GridSpec> grids,
                                                const TrainConfig& config,
                                                const RunOptions& options = {});

/// k-fold study: each fold is the test set once; the rest is split 3:1
/// into train and validation, and both scalers are fitted on the training
/// part only.
[[nodiscard]] ReportBundle run_kfold_study(const Dataset& data, std::size_t k,
                                           std::span<const GridSpec> grids,
                                           const TrainConfig& config,
                                           const RunOptions& options = {});

}  // namespace dann
