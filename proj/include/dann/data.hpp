#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "dann/matrix.hpp"

namespace dann {

struct Dataset {
  Matrix X;
  std::vector<double> y;
  std::vector<std::string> feature_names;
  std::string response_name = "y";

  [[nodiscard]] std::size_t size() const { return y.size(); }
  [[nodiscard]] std::size_t dims() const { return X.cols(); }

  [[nodiscard]] Dataset subset(std::span<const std::size_t> indices) const;

  /// Throws DataError on shape mismatch, no rows, or non-finite entries.
  void validate() const;
};

/// Noiseless regression functions of the two six-feature simulation models.
///   model 1: exp(x1^3 + x2^3 + x3^3 - x4^3 - x5^3 - x6^3)
///   model 2: (1 + x1 + 2 x2^2 + 3 x3^3 - exp(x4) - ln(x5 + 1) - |x6 - 0.5|)^2
[[nodiscard]] double model_mean(int model_id, std::span<const double> x);

/// model_mean applied to every row. Throws ConfigError for unknown models.
[[nodiscard]] std::vector<double> gen_mean_only(int model_id, const Matrix& X);

/// n draws of X ~ U(0,1)^6 and Y = mean(X) + N(0, 0.1^2).
///
/// Features and noise come from separate streams derived from `seed`.
[[nodiscard]] Dataset gen_model(int model_id, std::size_t n, std::uint64_t seed);
[[nodiscard]] inline Dataset gen_model1(std::size_t n, std::uint64_t seed) {
  return gen_model(1, n, seed);
}
[[nodiscard]] inline Dataset gen_model2(std::size_t n, std::uint64_t seed) {
  return gen_model(2, n, seed);
}

inline constexpr double kModelNoiseSd = 0.1;

/// Response standardization fitted on a training set (sample sd, n - 1).
struct ScalerY {
  double mean = 0.0;
  double sd = 1.0;

  /// Throws DataError for fewer than two values or zero spread.
  [[nodiscard]] static ScalerY fit(std::span<const double> y);

  [[nodiscard]] double apply(double v) const { return (v - mean) / sd; }
  [[nodiscard]] double invert(double v) const { return v * sd + mean; }
  [[nodiscard]] std::vector<double> apply(std::span<const double> v) const;
  [[nodiscard]] std::vector<double> invert(std::span<const double> v) const;

  bool operator==(const ScalerY&) const = default;
};

/// Per-feature min-max scaling fitted on a training fold. Rows outside the
/// fold may land outside [0,1]; additive layers clamp them.
struct ScalerX {
  std::vector<double> min;
  std::vector<double> max;

  /// Throws DataError when any column is constant.
  [[nodiscard]] static ScalerX fit(const Matrix& X);

  [[nodiscard]] Matrix apply(const Matrix& X) const;

  bool operator==(const ScalerX&) const = default;
};

/// Random partition of {0..n-1} into k sorted index sets whose sizes differ
/// by at most one (the first n % k sets get the extra element).
[[nodiscard]] std::vector<std::vector<std::size_t>> split_kfold(std::size_t n, std::size_t k,
                                                                std::uint64_t seed);

struct TrainValSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> val;
};

/// 3:1 random split; |train| = round(0.75 n) with halves rounded up.
[[nodiscard]] TrainValSplit split_train_val(std::span<const std::size_t> indices,
                                            std::uint64_t seed);

/// Reads a headered, comma-separated numeric file. Every column other than
/// `response_column` becomes a feature, in file order. With `log_response`,
/// y is the natural log of the response column.
///
/// Throws DataError naming the line and column of the first bad cell.
[[nodiscard]] Dataset load_csv(const std::filesystem::path& path,
                               const std::string& response_column, bool log_response = false);

/// Writes features then the response, 17 significant digits.
void write_csv(const std::filesystem::path& path, const Dataset& data);

}  // namespace dann
