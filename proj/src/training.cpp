#include "dann/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <fmt/format.h>

#include "dann/errors.hpp"
#include "dann/rng.hpp"

namespace dann {

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw ConfigError("lr must be > 0");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (max_epochs < 1) throw ConfigError("max_epochs must be >= 1");
  if (stop_window < 1) throw ConfigError("stop_window must be >= 1");
  if (!(stop_delta >= 0.0)) throw ConfigError("stop_delta must be >= 0");
}

void to_json(nlohmann::json& j, const TrainConfig& c) {
  j = nlohmann::json{{"lr", c.learning_rate},
                     {"batch_size", c.batch_size},
                     {"max_epochs", c.max_epochs},
                     {"stop_window", c.stop_window},
                     {"stop_delta", c.stop_delta},
                     {"seed", c.seed},
                     {"stop_granularity",
                      c.stop_granularity == StopGranularity::Epoch ? "epoch" : "batch"}};
}

void from_json(const nlohmann::json& j, TrainConfig& c) {
  try {
    c.learning_rate = j.value("lr", c.learning_rate);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.max_epochs = j.value("max_epochs", c.max_epochs);
    c.stop_window = j.value("stop_window", c.stop_window);
    c.stop_delta = j.value("stop_delta", c.stop_delta);
    c.seed = j.value("seed", c.seed);
    const auto granularity = j.value("stop_granularity", std::string("epoch"));
    if (granularity == "epoch")
      c.stop_granularity = StopGranularity::Epoch;
    else if (granularity == "batch")
      c.stop_granularity = StopGranularity::Batch;
    else
      throw ConfigError(fmt::format("stop_granularity must be epoch or batch, got '{}'", granularity));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(fmt::format("train config: {}", e.what()));
  }
  c.validate();
}

std::string_view to_string(StopReason reason) {
  return reason == StopReason::Plateau ? "plateau" : "max_epochs";
}

double loss_mse(std::span<const double> pred, std::span<const double> target) {
  if (pred.empty()) throw std::invalid_argument("loss_mse: empty input");
  if (pred.size() != target.size())
    throw std::invalid_argument(
        fmt::format("loss_mse: {} predictions vs {} targets", pred.size(), target.size()));
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double r = pred[i] - target[i];
    sum += r * r;
  }
  return sum / static_cast<double>(pred.size());
}

void accumulate_gradient(const ParamStore& params, const ForwardTrace& trace, double upstream,
                         std::span<double> grad) {
  const auto& layers = params.layout().layers();
  if (grad.size() != params.size())
    throw std::invalid_argument("accumulate_gradient: gradient length mismatch");
  if (trace.layers.size() != layers.size())
    throw std::invalid_argument("accumulate_gradient: trace does not match network");

  const auto values = params.values();
  const auto basis = params.spec().basis;
  std::vector<double> delta{upstream};  // dOutput / dPost of the current layer
  std::vector<double> delta_in;
  std::vector<double> dz;
  std::vector<double> basis_deriv;

  for (std::size_t l = layers.size(); l-- > 0;) {
    const auto& layer = layers[l];
    const auto& t = trace.layers[l];
    const std::size_t width = layer.row_width();
    const std::span<const double> features =
        layer.mixing == Mixing::Additive ? std::span<const double>(t.basis)
                                         : std::span<const double>(t.input);

    dz.resize(layer.outputs);
    for (std::size_t k = 0; k < layer.outputs; ++k)
      dz[k] = layer.activation ? delta[k] * apply_deriv(*layer.activation, t.pre[k]) : delta[k];

    for (std::size_t k = 0; k < layer.outputs; ++k) {
      if (dz[k] == 0.0) continue;
      grad[layer.bias_offset + k] += dz[k];
      double* g = grad.data() + layer.weight_offset + k * width;
      for (std::size_t i = 0; i < width; ++i) g[i] += dz[k] * features[i];
    }

    if (l == 0) break;

    delta_in.assign(layer.inputs, 0.0);
    if (layer.mixing == Mixing::Affine) {
      for (std::size_t k = 0; k < layer.outputs; ++k) {
        const double* w = values.data() + layer.weight_offset + k * width;
        for (std::size_t j = 0; j < layer.inputs; ++j) delta_in[j] += dz[k] * w[j];
      }
    } else {
      // Input j enters through sum_r c_kjr B_r(clamp(x_j)); the clamp blocks
      // the gradient outside [0,1].
      const auto& raw = trace.layers[l - 1].post;
      basis_deriv.resize(layer.q);
      for (std::size_t j = 0; j < layer.inputs; ++j) {
        if (raw[j] < 0.0 || raw[j] > 1.0) continue;
        eval_basis_deriv_row(basis, t.input[j], basis_deriv);
        double sum = 0.0;
        for (std::size_t k = 0; k < layer.outputs; ++k) {
          if (dz[k] == 0.0) continue;
          const double* c = values.data() + layer.weight_offset + k * width + j * layer.q;
          double slope = 0.0;
          for (std::size_t r = 0; r < layer.q; ++r) slope += c[r] * basis_deriv[r];
          sum += dz[k] * slope;
        }
        delta_in[j] = sum;
      }
    }
    delta.swap(delta_in);
  }
}

std::vector<double> backward(const ParamStore& params, const Matrix& X,
                             std::span<const double> y) {
  if (X.rows() == 0) throw std::invalid_argument("backward: empty batch");
  if (X.rows() != y.size())
    throw std::invalid_argument(
        fmt::format("backward: {} rows vs {} targets", X.rows(), y.size()));
  std::vector<double> grad(params.size(), 0.0);
  const double scale = 2.0 / static_cast<double>(X.rows());
  ForwardTrace trace;
  for (std::size_t i = 0; i < X.rows(); ++i) {
    const double pred = forward(params, X.row(i), trace);
    accumulate_gradient(params, trace, scale * (pred - y[i]), grad);
  }
  return grad;
}

void adam_step(AdamState& state, ParamStore& params, std::span<const double> grads, double lr) {
  if (grads.size() != params.size() || state.m.size() != params.size() ||
      state.v.size() != params.size())
    throw std::invalid_argument("adam_step: shape mismatch");
  ++state.t;
  const double correction1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.t));
  const double correction2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.t));
  auto theta = params.values();
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const double g = grads[i];
    state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * g;
    state.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * g * g;
    const double m_hat = state.m[i] / correction1;
    const double v_hat = state.v[i] / correction2;
    theta[i] -= lr * m_hat / (std::sqrt(v_hat) + state.eps);
  }
}

namespace {

double full_mse(const ParamStore& params, const Matrix& X, std::span<const double> y) {
  const double mse = loss_mse(predict(params, X), y);
  if (!std::isfinite(mse)) throw TrainingError("training loss became non-finite");
  return mse;
}

// Plateau detector over the sequence of full-training MSE evaluations.
class PlateauRule {
 public:
  PlateauRule(int window, double delta) : window_(static_cast<std::size_t>(window)), delta_(delta) {}

  /// Records an evaluation; true when training should stop.
  bool push(double mse) {
    prefix_min_.push_back(prefix_min_.empty() ? mse : std::min(prefix_min_.back(), mse));
    const std::size_t t = prefix_min_.size() - 1;
    if (t < window_) return false;
    return prefix_min_[t - window_] - mse <= delta_;
  }

 private:
  std::size_t window_;
  double delta_;
  std::vector<double> prefix_min_;
};

}  // namespace

TrainResult train(ParamStore params, const Matrix& X, std::span<const double> y,
                  const TrainConfig& config) {
  config.validate();
  if (X.rows() == 0) throw std::invalid_argument("train: empty training set");
  if (X.rows() != y.size())
    throw std::invalid_argument(fmt::format("train: {} rows vs {} targets", X.rows(), y.size()));

  const auto start = std::chrono::steady_clock::now();
  const std::size_t n = X.rows();
  TrainReport report;
  AdamState adam(params.size());
  PlateauRule plateau(config.stop_window, config.stop_delta);

  report.initial_mse = full_mse(params, X, y);
  plateau.push(report.initial_mse);

  std::vector<std::size_t> order(n);
  std::vector<double> grad(params.size());
  ForwardTrace trace;
  bool stopped = false;

  for (int epoch = 0; epoch < config.max_epochs && !stopped; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(derive_seed(config.seed, "shuffle", {static_cast<std::uint64_t>(epoch)}));
    rng.shuffle(std::span<std::size_t>(order));

    double last_mse = 0.0;
    for (std::size_t begin = 0; begin < n; begin += config.batch_size) {
      const std::size_t end = std::min(n, begin + config.batch_size);
      const double scale = 2.0 / static_cast<double>(end - begin);
      std::fill(grad.begin(), grad.end(), 0.0);
      for (std::size_t b = begin; b < end; ++b) {
        const std::size_t i = order[b];
        const double pred = forward(params, X.row(i), trace);
        accumulate_gradient(params, trace, scale * (pred - y[i]), grad);
      }
      adam_step(adam, params, grad, config.learning_rate);

      if (config.stop_granularity == StopGranularity::Batch) {
        last_mse = full_mse(params, X, y);
        if (plateau.push(last_mse)) {
          stopped = true;
          break;
        }
      }
    }

    if (config.stop_granularity == StopGranularity::Epoch) {
      last_mse = full_mse(params, X, y);
      stopped = plateau.push(last_mse);
    }
    report.epoch_mse.push_back(last_mse);
    report.epochs_run = epoch + 1;
  }

  report.stop_reason = stopped ? StopReason::Plateau : StopReason::MaxEpochs;
  report.wall_time_sec =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {std::move(params), std::move(report)};
}

}  // namespace dann
