#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "dann/activation.hpp"
#include "dann/basis.hpp"
#include "dann/matrix.hpp"

namespace dann {

/// DNN: affine+sigma hidden layers, affine output.
/// DANN: additive+g hidden layers, additive output.
/// HDANN1: additive first hidden layer, affine rest, affine output.
/// HDANN2: affine hidden layers (last one squashed by g), additive output.
/// HDANN3: additive first hidden layer, affine middle, last hidden squashed
///         by g, additive output. With L = 1 it is the single-layer DANN.
enum class NetworkKind { DNN, DANN, HDANN1, HDANN2, HDANN3 };

inline constexpr NetworkKind kAllNetworkKinds[] = {NetworkKind::DNN, NetworkKind::DANN,
                                                   NetworkKind::HDANN1, NetworkKind::HDANN2,
                                                   NetworkKind::HDANN3};

[[nodiscard]] std::string_view to_string(NetworkKind kind);
/// Case-insensitive. Throws ConfigError on unknown names.
[[nodiscard]] NetworkKind parse_network_kind(std::string_view name);

/// Architecture descriptor. Width p and basis count q are shared by every
/// layer and every expansion.
struct NetworkSpec {
  NetworkKind kind = NetworkKind::DNN;
  int d = 1;  // input dimension
  int L = 1;  // hidden layers
  int p = 1;  // nodes per hidden layer
  int q = 0;  // basis functions per expansion; unused by DNN
  ActivationKind sigma = ActivationKind::Logistic;
  ActivationKind g = ActivationKind::Logistic;
  BasisFamily basis = BasisFamily::Polynomial;

  /// Throws ConfigError when a field is out of range.
  void validate() const;

  bool operator==(const NetworkSpec&) const = default;
};

/// Closed-form parameter count.
[[nodiscard]] std::uint64_t param_count(const NetworkSpec& spec);

void to_json(nlohmann::json& j, const NetworkSpec& spec);
void from_json(const nlohmann::json& j, NetworkSpec& spec);

enum class Mixing { Affine, Additive };

/// One layer's slice of the flat parameter vector.
///
/// Affine:   weight(k, j)    at weight_offset + k * inputs + j
/// Additive: coeff(k, j, r)  at weight_offset + (k * inputs + j) * q + (r - 1)
/// Biases follow the weights: bias(k) at bias_offset + k.
struct LayerLayout {
  Mixing mixing = Mixing::Affine;
  std::size_t inputs = 0;
  std::size_t outputs = 0;
  std::size_t q = 1;  // 1 for affine layers
  std::optional<ActivationKind> activation;  // empty for the output layer
  std::size_t weight_offset = 0;
  std::size_t bias_offset = 0;

  [[nodiscard]] std::size_t row_width() const { return inputs * q; }
  [[nodiscard]] std::size_t weight_count() const { return outputs * row_width(); }
  [[nodiscard]] std::size_t end_offset() const { return bias_offset + outputs; }
};

/// Named position of one parameter.
struct ParamSlot {
  std::size_t layer = 0;  // 0..L-1 hidden, L output
  std::size_t dest = 0;   // node in this layer (0 for the output)
  std::optional<std::size_t> source;  // input node; empty for biases
  int basis_index = 0;                // r >= 1 for additive coefficients, else 0

  bool operator==(const ParamSlot&) const = default;
};

class Layout {
 public:
  explicit Layout(const NetworkSpec& spec);

  [[nodiscard]] const std::vector<LayerLayout>& layers() const { return layers_; }
  [[nodiscard]] std::size_t size() const { return size_; }

  /// Inverse of the offset formulas on LayerLayout.
  [[nodiscard]] ParamSlot describe(std::size_t offset) const;
  [[nodiscard]] std::size_t offset_of(const ParamSlot& slot) const;

 private:
  std::vector<LayerLayout> layers_;
  std::size_t size_ = 0;
};

/// Flat parameter vector tied to a spec and its layout.
class ParamStore {
 public:
  /// All parameters zero.
  explicit ParamStore(const NetworkSpec& spec);
  ParamStore(const NetworkSpec& spec, std::vector<double> values);

  [[nodiscard]] const NetworkSpec& spec() const { return spec_; }
  [[nodiscard]] const Layout& layout() const { return layout_; }
  [[nodiscard]] std::span<const double> values() const { return values_; }
  [[nodiscard]] std::span<double> values() { return values_; }
  [[nodiscard]] std::size_t size() const { return values_.size(); }

  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }

  bool operator==(const ParamStore& other) const {
    return spec_ == other.spec_ && values_ == other.values_;
  }

 private:
  NetworkSpec spec_;
  Layout layout_;
  std::vector<double> values_;
};

/// Xavier-uniform weights, a = sqrt(6 / (fan_in + fan_out)), zero biases.
///
/// fan_in counts the scalar features entering a node's linear combination
/// (inputs * q for additive layers); fan_out is the layer's own width (1 for
/// the output layer).
[[nodiscard]] ParamStore init_xavier(const NetworkSpec& spec, std::uint64_t seed);

/// Values retained from one layer of a forward pass.
struct LayerTrace {
  std::vector<double> input;  // after clamping to [0,1] for additive layers
  std::vector<double> basis;  // inputs * q basis values; additive layers only
  std::vector<double> pre;    // pre-activation
  std::vector<double> post;   // post-activation (== pre for the output layer)
};

struct ForwardTrace {
  std::vector<LayerTrace> layers;
  double output = 0.0;
};

/// Single-observation forward pass. Additive layers clamp their inputs to
/// [0,1]. Throws std::invalid_argument when x.size() != d.
double forward(const ParamStore& params, std::span<const double> x, ForwardTrace& trace);
[[nodiscard]] ForwardTrace forward(const ParamStore& params, std::span<const double> x);

struct BatchForward {
  std::vector<double> predictions;
  std::vector<ForwardTrace> traces;
};

/// Row-wise forward over X (n x d), retaining a trace per row.
[[nodiscard]] BatchForward forward_batch(const ParamStore& params, const Matrix& X);

/// Row-wise predictions only.
[[nodiscard]] std::vector<double> predict(const ParamStore& params, const Matrix& X);

}  // namespace dann
