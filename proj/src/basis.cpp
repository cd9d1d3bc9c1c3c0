#include "dann/basis.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <fmt/format.h>

#include "dann/errors.hpp"

namespace dann {

namespace {

constexpr double kPi = std::numbers::pi;

void check_index(int r) {
  if (r < 1) throw std::invalid_argument(fmt::format("basis index must be >= 1, got {}", r));
}

double int_power(double x, int r) {
  double result = 1.0;
  for (int i = 0; i < r; ++i) result *= x;
  return result;
}

double haar(int r, double x) {
  if (r == 1) return 1.0;
  // r - 1 = 2^j + k
  const auto m = static_cast<unsigned long long>(r - 1);
  int j = 0;
  while ((m >> (j + 1)) != 0) ++j;
  const auto level = 1ULL << j;
  const auto k = m - level;
  const double height = std::sqrt(static_cast<double>(level));
  if (x >= 1.0) return k + 1 == level ? -height : 0.0;
  // Both operations are exact for dyadic scaling.
  const double t = std::ldexp(x, j) - static_cast<double>(k);
  if (t < 0.0 || t >= 1.0) return 0.0;
  return t < 0.5 ? height : -height;
}

}  // namespace

std::string_view to_string(BasisFamily family) {
  switch (family) {
    case BasisFamily::Polynomial: return "poly";
    case BasisFamily::Cosine: return "cos";
    case BasisFamily::Haar: return "haar";
  }
  return "?";
}

BasisFamily parse_basis(std::string_view name) {
  if (name == "poly" || name == "polynomial") return BasisFamily::Polynomial;
  if (name == "cos" || name == "cosine") return BasisFamily::Cosine;
  if (name == "haar") return BasisFamily::Haar;
  throw ConfigError(fmt::format("unknown basis family '{}' (expected poly, cos or haar)", name));
}

double eval_basis(BasisFamily family, int r, double x) {
  check_index(r);
  switch (family) {
    case BasisFamily::Polynomial: return int_power(x, r);
    case BasisFamily::Cosine: return std::cos(r * kPi * x);
    case BasisFamily::Haar: return haar(r, x);
  }
  return 0.0;
}

double eval_basis_deriv(BasisFamily family, int r, double x) {
  check_index(r);
  switch (family) {
    case BasisFamily::Polynomial: return r * int_power(x, r - 1);
    case BasisFamily::Cosine: return -r * kPi * std::sin(r * kPi * x);
    case BasisFamily::Haar: return 0.0;
  }
  return 0.0;
}

void eval_basis_row(BasisFamily family, double x, std::span<double> out) {
  switch (family) {
    case BasisFamily::Polynomial: {
      double power = 1.0;
      for (auto& v : out) {
        power *= x;
        v = power;
      }
      return;
    }
    case BasisFamily::Cosine:
      for (std::size_t r = 0; r < out.size(); ++r)
        out[r] = std::cos(static_cast<double>(r + 1) * kPi * x);
      return;
    case BasisFamily::Haar:
      for (std::size_t r = 0; r < out.size(); ++r) out[r] = haar(static_cast<int>(r + 1), x);
      return;
  }
}

void eval_basis_deriv_row(BasisFamily family, double x, std::span<double> out) {
  switch (family) {
    case BasisFamily::Polynomial: {
      double power = 1.0;  // x^(r-1)
      for (std::size_t r = 0; r < out.size(); ++r) {
        out[r] = static_cast<double>(r + 1) * power;
        power *= x;
      }
      return;
    }
    case BasisFamily::Cosine:
      for (std::size_t r = 0; r < out.size(); ++r) {
        const double freq = static_cast<double>(r + 1) * kPi;
        out[r] = -freq * std::sin(freq * x);
      }
      return;
    case BasisFamily::Haar:
      for (auto& v : out) v = 0.0;
      return;
  }
}

double eval_expansion(BasisFamily family, std::span<const double> coeffs, double bias,
                      double x) {
  if (coeffs.empty()) throw std::invalid_argument("eval_expansion: empty coefficient vector");
  double sum = bias;
  for (std::size_t r = 0; r < coeffs.size(); ++r)
    sum += coeffs[r] * eval_basis(family, static_cast<int>(r + 1), x);
  return sum;
}

BasisFit fit_basis_least_squares(BasisFamily family, const std::function<double(double)>& target,
                                 int q, int grid_size) {
  if (q < 1) throw std::invalid_argument("fit: q must be >= 1");
  if (grid_size < 10 * q)
    throw std::invalid_argument(
        fmt::format("fit: grid_size {} below 10*q = {}", grid_size, 10 * q));

  const Eigen::Index rows = grid_size;
  const Eigen::Index cols = q + 1;
  Eigen::MatrixXd design(rows, cols);
  Eigen::VectorXd values(rows);
  std::vector<double> row(static_cast<std::size_t>(q));
  for (Eigen::Index i = 0; i < rows; ++i) {
    const double x = static_cast<double>(i) / static_cast<double>(grid_size - 1);
    eval_basis_row(family, x, row);
    design(i, 0) = 1.0;
    for (int r = 0; r < q; ++r) design(i, r + 1) = row[static_cast<std::size_t>(r)];
    values(i) = target(x);
  }

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  if (qr.rank() < cols)
    throw std::runtime_error(
        fmt::format("fit: rank-deficient design ({} of {} columns)", qr.rank(), cols));
  const Eigen::VectorXd solution = qr.solve(values);

  BasisFit fit;
  fit.bias = solution(0);
  fit.coeffs.assign(solution.data() + 1, solution.data() + cols);
  fit.sup_error = (design * solution - values).cwiseAbs().maxCoeff();
  return fit;
}

BasisFit fejer_cosine_fit(const std::function<double(double)>& target, int q, int grid_size) {
  return fit_basis_least_squares(BasisFamily::Cosine, target, q, grid_size);
}

}  // namespace dann
