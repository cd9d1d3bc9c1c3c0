#include "dann/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>

#include <fmt/format.h>

#include "dann/errors.hpp"
#include "dann/rng.hpp"

namespace dann {

namespace {

constexpr std::size_t kModelDims = 6;

double cube(double v) { return v * v * v; }

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

std::string_view unquote(std::string_view s) {
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') return s.substr(1, s.size() - 2);
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    fields.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

}  // namespace

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
  Dataset out;
  out.X = X.select_rows(indices);
  out.y.reserve(indices.size());
  for (const auto i : indices) out.y.push_back(y[i]);
  out.feature_names = feature_names;
  out.response_name = response_name;
  return out;
}

void Dataset::validate() const {
  if (y.empty()) throw DataError("dataset has no rows");
  if (X.rows() != y.size())
    throw DataError(fmt::format("dataset has {} feature rows but {} responses", X.rows(), y.size()));
  for (std::size_t i = 0; i < X.rows(); ++i) {
    for (std::size_t j = 0; j < X.cols(); ++j)
      if (!std::isfinite(X(i, j)))
        throw DataError(fmt::format("non-finite feature at row {}, column {}", i, j));
    if (!std::isfinite(y[i])) throw DataError(fmt::format("non-finite response at row {}", i));
  }
}

double model_mean(int model_id, std::span<const double> x) {
  if (x.size() != kModelDims)
    throw std::invalid_argument(fmt::format("model {} takes 6 features, got {}", model_id, x.size()));
  switch (model_id) {
    case 1:
      return std::exp(cube(x[0]) + cube(x[1]) + cube(x[2]) - cube(x[3]) - cube(x[4]) - cube(x[5]));
    case 2: {
      const double inner = 1.0 + x[0] + 2.0 * x[1] * x[1] + 3.0 * cube(x[2]) - std::exp(x[3]) -
                           std::log(x[4] + 1.0) - std::abs(x[5] - 0.5);
      return inner * inner;
    }
    default: throw ConfigError(fmt::format("unknown simulation model {}", model_id));
  }
}

std::vector<double> gen_mean_only(int model_id, const Matrix& X) {
  if (model_id != 1 && model_id != 2)
    throw ConfigError(fmt::format("unknown simulation model {}", model_id));
  std::vector<double> out(X.rows());
  for (std::size_t i = 0; i < X.rows(); ++i) out[i] = model_mean(model_id, X.row(i));
  return out;
}

Dataset gen_model(int model_id, std::size_t n, std::uint64_t seed) {
  if (model_id != 1 && model_id != 2)
    throw ConfigError(fmt::format("unknown simulation model {}", model_id));
  if (n == 0) throw std::invalid_argument("gen_model: n must be >= 1");

  Dataset data;
  data.X = Matrix(n, kModelDims);
  data.y.resize(n);
  for (std::size_t j = 0; j < kModelDims; ++j) data.feature_names.push_back(fmt::format("x{}", j + 1));

  Rng features(derive_seed(seed, "features"));
  Rng noise(derive_seed(seed, "noise"));
  for (std::size_t i = 0; i < n; ++i) {
    for (auto& v : data.X.row(i)) v = features.uniform01();
    data.y[i] = model_mean(model_id, data.X.row(i)) + noise.normal(0.0, kModelNoiseSd);
  }
  return data;
}

ScalerY ScalerY::fit(std::span<const double> y) {
  if (y.size() < 2) throw DataError("response standardization needs at least two values");
  const double n = static_cast<double>(y.size());
  const double mean = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double ss = 0.0;
  for (const double v : y) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / (n - 1.0));
  if (!(sd > 0.0)) throw DataError("response is constant on the training set");
  return {mean, sd};
}

std::vector<double> ScalerY::apply(std::span<const double> v) const {
  std::vector<double> out(v.size());
  std::transform(v.begin(), v.end(), out.begin(), [this](double x) { return apply(x); });
  return out;
}

std::vector<double> ScalerY::invert(std::span<const double> v) const {
  std::vector<double> out(v.size());
  std::transform(v.begin(), v.end(), out.begin(), [this](double x) { return invert(x); });
  return out;
}

ScalerX ScalerX::fit(const Matrix& X) {
  if (X.rows() == 0) throw DataError("feature scaling needs at least one row");
  ScalerX s;
  s.min.assign(X.cols(), 0.0);
  s.max.assign(X.cols(), 0.0);
  for (std::size_t j = 0; j < X.cols(); ++j) {
    double lo = X(0, j), hi = X(0, j);
    for (std::size_t i = 1; i < X.rows(); ++i) {
      lo = std::min(lo, X(i, j));
      hi = std::max(hi, X(i, j));
    }
    if (!(hi > lo)) throw DataError(fmt::format("feature {} is constant on the training set", j));
    s.min[j] = lo;
    s.max[j] = hi;
  }
  return s;
}

Matrix ScalerX::apply(const Matrix& X) const {
  if (X.cols() != min.size())
    throw std::invalid_argument(
        fmt::format("ScalerX: fitted on {} features, got {}", min.size(), X.cols()));
  Matrix out(X.rows(), X.cols());
  for (std::size_t i = 0; i < X.rows(); ++i)
    for (std::size_t j = 0; j < X.cols(); ++j) out(i, j) = (X(i, j) - min[j]) / (max[j] - min[j]);
  return out;
}

std::vector<std::vector<std::size_t>> split_kfold(std::size_t n, std::size_t k,
                                                  std::uint64_t seed) {
  if (k < 1 || k > n)
    throw std::invalid_argument(fmt::format("split_kfold: need 1 <= k <= n (k={}, n={})", k, n));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(derive_seed(seed, "kfold"));
  rng.shuffle(std::span<std::size_t>(order));

  std::vector<std::vector<std::size_t>> folds(k);
  std::size_t pos = 0;
  for (std::size_t f = 0; f < k; ++f) {
    const std::size_t size = n / k + (f < n % k ? 1 : 0);
    folds[f].assign(order.begin() + static_cast<std::ptrdiff_t>(pos),
                    order.begin() + static_cast<std::ptrdiff_t>(pos + size));
    std::sort(folds[f].begin(), folds[f].end());
    pos += size;
  }
  return folds;
}

TrainValSplit split_train_val(std::span<const std::size_t> indices, std::uint64_t seed) {
  std::vector<std::size_t> order(indices.begin(), indices.end());
  Rng rng(derive_seed(seed, "train_val"));
  rng.shuffle(std::span<std::size_t>(order));
  // round(0.75 n) with .5 going to the training side: floor((3n + 2) / 4).
  const std::size_t n_train = (3 * order.size() + 2) / 4;
  TrainValSplit split;
  split.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  split.val.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.val.begin(), split.val.end());
  return split;
}

Dataset load_csv(const std::filesystem::path& path, const std::string& response_column,
                 bool log_response) {
  std::ifstream in(path);
  if (!in) throw DataError(fmt::format("cannot open {}", path.string()));

  std::string line;
  if (!std::getline(in, line)) throw DataError(fmt::format("{}: missing header row", path.string()));
  if (line.starts_with("\xEF\xBB\xBF")) line.erase(0, 3);
  const auto header = split_fields(line);

  std::vector<std::string> names;
  for (const auto field : header) names.emplace_back(unquote(field));
  const auto response_it = std::find(names.begin(), names.end(), response_column);
  if (response_it == names.end())
    throw DataError(fmt::format("{}: no column named '{}'", path.string(), response_column));
  const auto response_idx = static_cast<std::size_t>(response_it - names.begin());

  Dataset data;
  data.response_name = response_column;
  for (std::size_t j = 0; j < names.size(); ++j)
    if (j != response_idx) data.feature_names.push_back(names[j]);

  std::vector<double> row(names.size() - 1);
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_fields(line);
    if (fields.size() != names.size())
      throw DataError(fmt::format("{}: line {} has {} fields, header has {}", path.string(), line_no,
                                  fields.size(), names.size()));
    double response = 0.0;
    std::size_t out = 0;
    for (std::size_t j = 0; j < fields.size(); ++j) {
      const auto cell = fields[j];
      double value = 0.0;
      const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
      if (cell.empty() || ec != std::errc() || ptr != cell.data() + cell.size() ||
          !std::isfinite(value))
        throw DataError(fmt::format("{}: line {}, column '{}': cannot parse '{}' as a finite number",
                                    path.string(), line_no, names[j], cell));
      if (j == response_idx)
        response = value;
      else
        row[out++] = value;
    }
    if (log_response) {
      if (!(response > 0.0))
        throw DataError(fmt::format("{}: line {}: response {} is not positive, cannot take log",
                                    path.string(), line_no, response));
      response = std::log(response);
    }
    data.X.append_row(row);
    data.y.push_back(response);
  }
  if (data.y.empty()) throw DataError(fmt::format("{}: no data rows", path.string()));
  return data;
}

void write_csv(const std::filesystem::path& path, const Dataset& data) {
  std::ofstream out(path);
  if (!out) throw DataError(fmt::format("cannot write {}", path.string()));
  for (std::size_t j = 0; j < data.dims(); ++j) {
    const auto name = j < data.feature_names.size() ? data.feature_names[j] : fmt::format("x{}", j + 1);
    out << name << ',';
  }
  out << data.response_name << '\n';
  for (std::size_t i = 0; i < data.size(); ++i) {
    for (const double v : data.X.row(i)) out << fmt::format("{:.17g},", v);
    out << fmt::format("{:.17g}\n", data.y[i]);
  }
  if (!out) throw DataError(fmt::format("write failed for {}", path.string()));
}

}  // namespace dann
