#include "dann/network.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <stdexcept>
#include <string>

#include <fmt/format.h>

#include "dann/errors.hpp"
#include "dann/rng.hpp"

namespace dann {

std::string_view to_string(NetworkKind kind) {
  switch (kind) {
    case NetworkKind::DNN: return "DNN";
    case NetworkKind::DANN: return "DANN";
    case NetworkKind::HDANN1: return "HDANN1";
    case NetworkKind::HDANN2: return "HDANN2";
    case NetworkKind::HDANN3: return "HDANN3";
  }
  return "?";
}

NetworkKind parse_network_kind(std::string_view name) {
  std::string upper(name);
  std::transform(upper.begin(), upper.end(), upper.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  for (const auto kind : kAllNetworkKinds)
    if (upper == to_string(kind)) return kind;
  throw ConfigError(fmt::format("unknown network kind '{}'", name));
}

void NetworkSpec::validate() const {
  if (d < 1) throw ConfigError(fmt::format("d must be >= 1, got {}", d));
  if (L < 1) throw ConfigError(fmt::format("L must be >= 1, got {}", L));
  if (p < 1) throw ConfigError(fmt::format("p must be >= 1, got {}", p));
  if (kind != NetworkKind::DNN && q < 1)
    throw ConfigError(fmt::format("q must be >= 1 for {}, got {}", to_string(kind), q));
  if (!is_unit_range(g))
    throw ConfigError(fmt::format("g must map into [0,1]; '{}' does not", to_string(g)));
}

std::uint64_t param_count(const NetworkSpec& spec) {
  spec.validate();
  const std::uint64_t d = spec.d, L = spec.L, p = spec.p, q = spec.q;
  const std::uint64_t affine_inner = (p + 1) * p * (L - 1);
  switch (spec.kind) {
    case NetworkKind::DNN: return (d + 1) * p + affine_inner + p + 1;
    case NetworkKind::DANN: return (d * q + 1) * p + (p * q + 1) * p * (L - 1) + p * q + 1;
    case NetworkKind::HDANN1: return (d * q + 1) * p + affine_inner + p + 1;
    case NetworkKind::HDANN2: return (d + 1) * p + affine_inner + p * q + 1;
    case NetworkKind::HDANN3: return (d * q + 1) * p + affine_inner + p * q + 1;
  }
  return 0;
}

void to_json(nlohmann::json& j, const NetworkSpec& spec) {
  j = nlohmann::json{{"kind", to_string(spec.kind)},   {"d", spec.d},
                     {"L", spec.L},                     {"p", spec.p},
                     {"q", spec.q},                     {"sigma", to_string(spec.sigma)},
                     {"g", to_string(spec.g)},          {"basis", to_string(spec.basis)}};
}

void from_json(const nlohmann::json& j, NetworkSpec& spec) {
  try {
    spec.kind = parse_network_kind(j.at("kind").get<std::string>());
    spec.d = j.at("d").get<int>();
    spec.L = j.at("L").get<int>();
    spec.p = j.at("p").get<int>();
    spec.q = j.value("q", 0);
    spec.sigma = parse_activation(j.value("sigma", std::string("sigmoid")));
    spec.g = parse_activation(j.value("g", std::string("sigmoid")));
    spec.basis = parse_basis(j.value("basis", std::string("poly")));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(fmt::format("network spec: {}", e.what()));
  }
}

Layout::Layout(const NetworkSpec& spec) {
  spec.validate();
  const auto L = static_cast<std::size_t>(spec.L);
  const auto p = static_cast<std::size_t>(spec.p);
  const auto q = static_cast<std::size_t>(spec.q);

  auto add_layer = [&](Mixing mixing, std::size_t inputs, std::size_t outputs,
                       std::optional<ActivationKind> activation) {
    LayerLayout layer;
    layer.mixing = mixing;
    layer.inputs = inputs;
    layer.outputs = outputs;
    layer.q = mixing == Mixing::Additive ? q : 1;
    layer.activation = activation;
    layer.weight_offset = size_;
    layer.bias_offset = size_ + layer.weight_count();
    size_ = layer.end_offset();
    layers_.push_back(layer);
  };

  for (std::size_t l = 0; l < L; ++l) {
    const std::size_t inputs = l == 0 ? static_cast<std::size_t>(spec.d) : p;
    const bool first = l == 0;
    const bool last = l + 1 == L;
    switch (spec.kind) {
      case NetworkKind::DNN: add_layer(Mixing::Affine, inputs, p, spec.sigma); break;
      case NetworkKind::DANN: add_layer(Mixing::Additive, inputs, p, spec.g); break;
      case NetworkKind::HDANN1:
        add_layer(first ? Mixing::Additive : Mixing::Affine, inputs, p, spec.sigma);
        break;
      case NetworkKind::HDANN2:
        add_layer(Mixing::Affine, inputs, p, last ? spec.g : spec.sigma);
        break;
      case NetworkKind::HDANN3:
        add_layer(first ? Mixing::Additive : Mixing::Affine, inputs, p,
                  last ? spec.g : spec.sigma);
        break;
    }
  }
  const bool additive_output = spec.kind == NetworkKind::DANN ||
                               spec.kind == NetworkKind::HDANN2 ||
                               spec.kind == NetworkKind::HDANN3;
  add_layer(additive_output ? Mixing::Additive : Mixing::Affine, p, 1, std::nullopt);
}

ParamSlot Layout::describe(std::size_t offset) const {
  if (offset >= size_) throw std::out_of_range("Layout::describe: offset past end");
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const auto& layer = layers_[l];
    if (offset >= layer.end_offset()) continue;
    ParamSlot slot;
    slot.layer = l;
    if (offset >= layer.bias_offset) {
      slot.dest = offset - layer.bias_offset;
      return slot;
    }
    const std::size_t local = offset - layer.weight_offset;
    slot.dest = local / layer.row_width();
    const std::size_t within = local % layer.row_width();
    slot.source = within / layer.q;
    if (layer.mixing == Mixing::Additive) slot.basis_index = static_cast<int>(within % layer.q) + 1;
    return slot;
  }
  throw std::logic_error("Layout::describe: unreachable");
}

std::size_t Layout::offset_of(const ParamSlot& slot) const {
  const auto& layer = layers_.at(slot.layer);
  if (slot.dest >= layer.outputs) throw std::out_of_range("offset_of: dest node out of range");
  if (!slot.source) return layer.bias_offset + slot.dest;
  if (*slot.source >= layer.inputs) throw std::out_of_range("offset_of: source out of range");
  std::size_t r = 0;
  if (layer.mixing == Mixing::Additive) {
    if (slot.basis_index < 1 || static_cast<std::size_t>(slot.basis_index) > layer.q)
      throw std::out_of_range("offset_of: basis index out of range");
    r = static_cast<std::size_t>(slot.basis_index - 1);
  } else if (slot.basis_index != 0) {
    throw std::out_of_range("offset_of: affine weights carry no basis index");
  }
  return layer.weight_offset + (slot.dest * layer.inputs + *slot.source) * layer.q + r;
}

ParamStore::ParamStore(const NetworkSpec& spec)
    : spec_(spec), layout_(spec), values_(layout_.size(), 0.0) {}

ParamStore::ParamStore(const NetworkSpec& spec, std::vector<double> values)
    : spec_(spec), layout_(spec), values_(std::move(values)) {
  if (values_.size() != layout_.size())
    throw std::invalid_argument(fmt::format("ParamStore: {} values for a layout of {}",
                                            values_.size(), layout_.size()));
}

ParamStore init_xavier(const NetworkSpec& spec, std::uint64_t seed) {
  ParamStore store(spec);
  Rng rng(derive_seed(seed, "xavier"));
  for (const auto& layer : store.layout().layers()) {
    const auto fan_in = static_cast<double>(layer.row_width());
    const auto fan_out = static_cast<double>(layer.outputs);
    const double a = std::sqrt(6.0 / (fan_in + fan_out));
    for (std::size_t i = 0; i < layer.weight_count(); ++i)
      store[layer.weight_offset + i] = a * (2.0 * rng.uniform_open01() - 1.0);
  }
  return store;
}

double forward(const ParamStore& params, std::span<const double> x, ForwardTrace& trace) {
  const auto& spec = params.spec();
  if (x.size() != static_cast<std::size_t>(spec.d))
    throw std::invalid_argument(
        fmt::format("forward: input has {} features, network expects {}", x.size(), spec.d));

  const auto& layers = params.layout().layers();
  trace.layers.resize(layers.size());
  const auto values = params.values();

  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& layer = layers[l];
    auto& t = trace.layers[l];
    const std::span<const double> in = l == 0 ? x : std::span<const double>(trace.layers[l - 1].post);

    t.input.assign(in.begin(), in.end());
    std::span<const double> features = t.input;
    if (layer.mixing == Mixing::Additive) {
      for (auto& v : t.input) v = std::clamp(v, 0.0, 1.0);
      t.basis.resize(layer.row_width());
      for (std::size_t j = 0; j < layer.inputs; ++j)
        eval_basis_row(spec.basis, t.input[j],
                       std::span<double>(t.basis).subspan(j * layer.q, layer.q));
      features = t.basis;
    } else {
      t.basis.clear();
    }

    t.pre.resize(layer.outputs);
    t.post.resize(layer.outputs);
    const std::size_t width = layer.row_width();
    for (std::size_t k = 0; k < layer.outputs; ++k) {
      const double* w = values.data() + layer.weight_offset + k * width;
      double z = values[layer.bias_offset + k];
      for (std::size_t i = 0; i < width; ++i) z += w[i] * features[i];
      t.pre[k] = z;
      t.post[k] = layer.activation ? apply(*layer.activation, z) : z;
    }
  }
  trace.output = trace.layers.back().post[0];
  return trace.output;
}

ForwardTrace forward(const ParamStore& params, std::span<const double> x) {
  ForwardTrace trace;
  forward(params, x, trace);
  return trace;
}

BatchForward forward_batch(const ParamStore& params, const Matrix& X) {
  BatchForward out;
  out.predictions.resize(X.rows());
  out.traces.resize(X.rows());
  for (std::size_t i = 0; i < X.rows(); ++i)
    out.predictions[i] = forward(params, X.row(i), out.traces[i]);
  return out;
}

std::vector<double> predict(const ParamStore& params, const Matrix& X) {
  std::vector<double> out(X.rows());
  ForwardTrace scratch;
  for (std::size_t i = 0; i < X.rows(); ++i) out[i] = forward(params, X.row(i), scratch);
  return out;
}

}  // namespace dann
