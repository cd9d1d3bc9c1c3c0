#pragma once

#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace dann {

/// Families of known functions on [0,1] whose finite linear combinations
/// (plus a constant) approximate any continuous function uniformly.
///
/// Members are indexed from r = 1; the constant term is carried separately
/// as a bias.
///
///   Polynomial  B_r(x) = x^r
///   Cosine      B_r(x) = cos(r*pi*x)
///   Haar        r = 1 is the constant 1; r = 2^j + k + 1 (0 <= k < 2^j) is
///               psi_{j,k}(x) = 2^{j/2} on the left half of
///               [k 2^-j, (k+1) 2^-j), -2^{j/2} on the right half, 0 else.
enum class BasisFamily { Polynomial, Cosine, Haar };

/// "poly", "cos", "haar".
[[nodiscard]] std::string_view to_string(BasisFamily family);
/// Inverse of to_string; throws ConfigError on unknown names.
[[nodiscard]] BasisFamily parse_basis(std::string_view name);

/// B_r(x). Throws std::invalid_argument for r == 0.
///
/// Haar uses half-open pieces (value of the right piece at interior
/// breakpoints); at x == 1 the left limit is returned.
[[nodiscard]] double eval_basis(BasisFamily family, int r, double x);

/// dB_r/dx. Haar returns 0 everywhere.
[[nodiscard]] double eval_basis_deriv(BasisFamily family, int r, double x);

/// Writes B_1(x) .. B_q(x) into `out` (size q). Faster than q separate calls
/// for the polynomial and cosine families.
void eval_basis_row(BasisFamily family, double x, std::span<double> out);

/// Writes B_1'(x) .. B_q'(x) into `out` (size q).
void eval_basis_deriv_row(BasisFamily family, double x, std::span<double> out);

/// sum_{r=1..q} coeffs[r-1] * B_r(x) + bias. Rejects empty `coeffs`.
[[nodiscard]] double eval_expansion(BasisFamily family, std::span<const double> coeffs,
                                    double bias, double x);

struct BasisFit {
  std::vector<double> coeffs;  // c_1 .. c_q
  double bias = 0.0;
  double sup_error = 0.0;  // max |target - fit| over the fitting grid
};

/// Least-squares fit of `target` on the uniform grid
/// {i / (grid_size - 1) : 0 <= i < grid_size} with {1, B_1, ..., B_q}.
///
/// Requires grid_size >= 10 q. Throws std::runtime_error if the design
/// matrix is numerically rank deficient.
[[nodiscard]] BasisFit fit_basis_least_squares(BasisFamily family,
                                               const std::function<double(double)>& target,
                                               int q, int grid_size);

/// Cosine instance of fit_basis_least_squares: a constructive witness that
/// cosine expansions approximate continuous targets uniformly.
[[nodiscard]] BasisFit fejer_cosine_fit(const std::function<double(double)>& target, int q,
                                        int grid_size);

}  // namespace dann
