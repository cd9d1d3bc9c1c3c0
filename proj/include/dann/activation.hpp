#pragma once

#include <string_view>

namespace dann {

/// Fixed scalar nonlinearities. Logistic and TanhUnit map into (0,1) and can
/// serve as the squashing map that feeds a basis expansion.
enum class ActivationKind { Logistic, Tanh, ReLU, TanhUnit };

/// "sigmoid", "tanh", "relu", "tanhunit".
[[nodiscard]] std::string_view to_string(ActivationKind kind);

/// Case-insensitive; accepts "logistic" as an alias of "sigmoid".
/// Throws ConfigError on unknown names.
[[nodiscard]] ActivationKind parse_activation(std::string_view name);

/// True for kinds whose range lies in [0,1].
[[nodiscard]] constexpr bool is_unit_range(ActivationKind kind) {
  return kind == ActivationKind::Logistic || kind == ActivationKind::TanhUnit;
}

[[nodiscard]] double apply(ActivationKind kind, double x);

/// ReLU'(0) is taken as 0.
[[nodiscard]] double apply_deriv(ActivationKind kind, double x);

}  // namespace dann
