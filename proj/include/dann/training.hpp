#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "dann/matrix.hpp"
#include "dann/network.hpp"

namespace dann {

/// What one early-stopping check is attached to.
enum class StopGranularity { Epoch, Batch };

struct TrainConfig {
  double learning_rate = 1e-4;
  std::size_t batch_size = 512;
  int max_epochs = 10000;
  int stop_window = 10;
  double stop_delta = 1e-3;
  std::uint64_t seed = 0;
  StopGranularity stop_granularity = StopGranularity::Epoch;

  /// Throws ConfigError.
  void validate() const;

  bool operator==(const TrainConfig&) const = default;
};

/// Keys: lr, batch_size, max_epochs, stop_window, stop_delta, seed,
/// stop_granularity ("epoch" | "batch"). Missing keys keep their defaults.
void to_json(nlohmann::json& j, const TrainConfig& config);
void from_json(const nlohmann::json& j, TrainConfig& config);

struct AdamState {
  explicit AdamState(std::size_t n) : m(n, 0.0), v(n, 0.0) {}

  std::vector<double> m;
  std::vector<double> v;
  std::uint64_t t = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

enum class StopReason { Plateau, MaxEpochs };
[[nodiscard]] std::string_view to_string(StopReason reason);

struct TrainReport {
  int epochs_run = 0;
  StopReason stop_reason = StopReason::MaxEpochs;
  double initial_mse = 0.0;        // before the first update
  std::vector<double> epoch_mse;   // full-training MSE at the end of each epoch
  double wall_time_sec = 0.0;
};

/// Mean squared residual. Throws std::invalid_argument on empty or
/// mismatched inputs.
[[nodiscard]] double loss_mse(std::span<const double> pred, std::span<const double> target);

/// Adds d(output)/d(theta) * upstream into `grad`, reading the activations
/// retained in `trace`. `grad` must have params.size() entries.
void accumulate_gradient(const ParamStore& params, const ForwardTrace& trace, double upstream,
                         std::span<double> grad);

/// Gradient of the batch mean squared error with respect to every
/// parameter, in layout order.
[[nodiscard]] std::vector<double> backward(const ParamStore& params, const Matrix& X,
                                           std::span<const double> y);

/// One bias-corrected ADAM update; increments state.t.
void adam_step(AdamState& state, ParamStore& params, std::span<const double> grads, double lr);

struct TrainResult {
  ParamStore params;
  TrainReport report;
};

/// Mini-batch ADAM on mean squared error with plateau stopping.
///
/// Full-training MSE is evaluated once before training and after every
/// epoch (or every batch, per stop_granularity). Training stops as soon as
/// the best value recorded at least `stop_window` evaluations ago exceeds
/// the current value by no more than `stop_delta`, or after max_epochs.
/// Throws TrainingError on a non-finite loss.
[[nodiscard]] TrainResult train(ParamStore params, const Matrix& X, std::span<const double> y,
                                const TrainConfig& config);

}  // namespace dann
