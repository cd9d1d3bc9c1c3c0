#include "dann/activation.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <string>

#include <fmt/format.h>

#include "dann/errors.hpp"

namespace dann {

namespace {

// Open-interval bounds: saturated logistic values are pinned one ulp inside
// (0,1).
const double kLowest = std::numeric_limits<double>::denorm_min();
const double kHighest = std::nextafter(1.0, 0.0);

double logistic(double x) {
  double y;
  if (x >= 0.0) {
    y = 1.0 / (1.0 + std::exp(-x));
  } else {
    const double e = std::exp(x);
    y = e / (1.0 + e);
  }
  return std::clamp(y, kLowest, kHighest);
}

double logistic_deriv(double x) {
  // s(1-s) written through e^{-|x|} to avoid cancellation.
  const double e = std::exp(-std::abs(x));
  return e / ((1.0 + e) * (1.0 + e));
}

}  // namespace

std::string_view to_string(ActivationKind kind) {
  switch (kind) {
    case ActivationKind::Logistic: return "sigmoid";
    case ActivationKind::Tanh: return "tanh";
    case ActivationKind::ReLU: return "relu";
    case ActivationKind::TanhUnit: return "tanhunit";
  }
  return "?";
}

ActivationKind parse_activation(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "sigmoid" || lower == "logistic") return ActivationKind::Logistic;
  if (lower == "tanh") return ActivationKind::Tanh;
  if (lower == "relu") return ActivationKind::ReLU;
  if (lower == "tanhunit") return ActivationKind::TanhUnit;
  throw ConfigError(
      fmt::format("unknown activation '{}' (expected sigmoid, tanh, relu or tanhunit)", name));
}

double apply(ActivationKind kind, double x) {
  switch (kind) {
    case ActivationKind::Logistic: return logistic(x);
    case ActivationKind::Tanh: return std::tanh(x);
    case ActivationKind::ReLU: return x > 0.0 ? x : 0.0;
    // (tanh(x) + 1) / 2 == logistic(2x); the latter keeps precision for x << 0.
    case ActivationKind::TanhUnit: return logistic(2.0 * x);
  }
  return 0.0;
}

double apply_deriv(ActivationKind kind, double x) {
  switch (kind) {
    case ActivationKind::Logistic: return logistic_deriv(x);
    case ActivationKind::Tanh: {
      const double t = std::tanh(x);
      return 1.0 - t * t;
    }
    case ActivationKind::ReLU: return x > 0.0 ? 1.0 : 0.0;
    case ActivationKind::TanhUnit: return 2.0 * logistic_deriv(2.0 * x);
  }
  return 0.0;
}

}  // namespace dann
