#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <numeric>
#include <set>
#include <stdexcept>

#include "dann/data.hpp"
#include "dann/errors.hpp"
#include "dann/rng.hpp"
#include "test_util.hpp"

using namespace dann;
using doctest::Approx;

namespace {

std::vector<std::size_t> iota_indices(std::size_t n) {
  std::vector<std::size_t> v(n);
  std::iota(v.begin(), v.end(), 0);
  return v;
}

std::string error_message(const auto& fn) {
  try {
    fn();
  } catch (const DataError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("model mean functions") {
  using V = std::vector<double>;
  CHECK(model_mean(1, V{0, 0, 0, 0, 0, 0}) == 1.0);
  CHECK(model_mean(1, V{1, 1, 1, 1, 1, 1}) == 1.0);
  CHECK(model_mean(1, V{1, 0, 0, 0, 0, 0}) == Approx(std::numbers::e).epsilon(1e-15));
  CHECK(model_mean(2, V{0, 0, 0, 0, 0, 0}) == Approx(0.25).epsilon(1e-15));
  CHECK(model_mean(2, V{0, 0, 0, 0, 0, 0.5}) == Approx(0.0).epsilon(1e-15));
  CHECK(model_mean(2, V{1, 1, 1, 0, 0, 0.5}) == Approx(36.0).epsilon(1e-15));
  CHECK_THROWS_AS((void)model_mean(1, V{0, 0}), std::invalid_argument);

  Matrix X(2, 6);
  X(1, 0) = 1.0;
  const auto means = gen_mean_only(1, X);
  CHECK(means[0] == 1.0);
  CHECK(means[1] == Approx(std::numbers::e));
  CHECK_THROWS_AS((void)gen_mean_only(3, X), ConfigError);
}

TEST_CASE("simulated noise has the stated distribution") {
  for (const int model : {1, 2}) {
    const auto data = gen_model(model, 100'000, 77);
    CHECK(data.dims() == 6);
    const auto mean = gen_mean_only(model, data.X);
    double sum = 0.0, sq = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
      const double e = data.y[i] - mean[i];
      sum += e;
      sq += e * e;
    }
    const double n = static_cast<double>(data.size());
    const double m = sum / n;
    CHECK(std::abs(m) < 0.002);
    CHECK((sq / n - m * m) == Approx(0.01).epsilon(0.10));
    double lo = 1.0, hi = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i)
      for (const double v : data.X.row(i)) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
    CHECK(lo >= 0.0);
    CHECK(hi <= 1.0);
    CHECK(lo < 1e-3);
    CHECK(hi > 1 - 1e-3);
  }
}

TEST_CASE("simulation is deterministic per seed") {
  const auto a = gen_model(2, 50, 1);
  CHECK(a.X == gen_model(2, 50, 1).X);
  CHECK(a.y == gen_model(2, 50, 1).y);
  CHECK_FALSE(a.y == gen_model(2, 50, 2).y);
  // A longer draw extends the shorter one.
  const auto longer = gen_model(2, 60, 1);
  CHECK(std::equal(a.y.begin(), a.y.end(), longer.y.begin()));
}

TEST_CASE("ScalerY") {
  const std::vector<double> y{0, 2};
  const auto s = ScalerY::fit(y);
  CHECK(s.mean == 1.0);
  // n - 1 denominator: sqrt(((0 - 1)^2 + (2 - 1)^2) / 1).
  CHECK(s.sd == Approx(std::numbers::sqrt2).epsilon(1e-15));
  const auto z2 = s.apply(y);
  CHECK(z2[0] == Approx(-1 / std::numbers::sqrt2).epsilon(1e-15));
  CHECK(z2[1] == Approx(1 / std::numbers::sqrt2).epsilon(1e-15));

  const auto data = gen_model(1, 500, 3);
  const auto fitted = ScalerY::fit(data.y);
  const auto z = fitted.apply(data.y);
  const double mean = std::accumulate(z.begin(), z.end(), 0.0) / z.size();
  double ss = 0.0;
  for (const double v : z) ss += (v - mean) * (v - mean);
  CHECK(std::abs(mean) < 1e-10);
  CHECK(std::sqrt(ss / (z.size() - 1)) == Approx(1.0).epsilon(1e-10));
  const auto back = fitted.invert(z);
  for (std::size_t i = 0; i < back.size(); ++i) CHECK(std::abs(back[i] - data.y[i]) < 1e-12);

  CHECK_THROWS_AS((void)ScalerY::fit(std::vector<double>{4, 4, 4}), DataError);
  CHECK_THROWS_AS((void)ScalerY::fit(std::vector<double>{4}), DataError);
}

TEST_CASE("ScalerX") {
  Matrix train(2, 1);
  train(0, 0) = 2;
  train(1, 0) = 4;
  const auto s = ScalerX::fit(train);
  Matrix other(2, 1);
  other(0, 0) = 3;
  other(1, 0) = 5;
  const auto scaled = s.apply(other);
  CHECK(scaled(0, 0) == 0.5);
  CHECK(scaled(1, 0) == 1.5);

  const auto fit_self = s.apply(train);
  CHECK(fit_self(0, 0) == 0.0);
  CHECK(fit_self(1, 0) == 1.0);

  Matrix constant(3, 2);
  constant(0, 0) = 1;
  CHECK_THROWS_AS((void)ScalerX::fit(constant), DataError);
}

TEST_CASE("split_kfold") {
  const auto check_partition = [](const std::vector<std::vector<std::size_t>>& folds, std::size_t n) {
    std::set<std::size_t> all;
    std::size_t total = 0;
    for (const auto& f : folds) {
      CHECK(std::is_sorted(f.begin(), f.end()));
      all.insert(f.begin(), f.end());
      total += f.size();
    }
    CHECK(total == n);
    CHECK(all.size() == n);
    if (n > 0) CHECK(*all.rbegin() == n - 1);
  };
  const auto even = split_kfold(10, 5, 1);
  CHECK(even.size() == 5);
  for (const auto& f : even) CHECK(f.size() == 2);
  check_partition(even, 10);

  const auto uneven = split_kfold(11, 5, 1);
  std::multiset<std::size_t> sizes;
  for (const auto& f : uneven) sizes.insert(f.size());
  CHECK(sizes == std::multiset<std::size_t>{2, 2, 2, 2, 3});
  check_partition(uneven, 11);

  for (std::size_t n = 5; n < 200; n += 17) check_partition(split_kfold(n, 5, n), n);
  CHECK(split_kfold(50, 5, 9) == split_kfold(50, 5, 9));
  CHECK_FALSE(split_kfold(50, 5, 9) == split_kfold(50, 5, 10));
  CHECK_THROWS_AS((void)split_kfold(3, 5, 1), std::invalid_argument);
  CHECK_THROWS_AS((void)split_kfold(3, 0, 1), std::invalid_argument);
}

TEST_CASE("split_train_val") {
  const auto eight = split_train_val(iota_indices(8), 1);
  CHECK(eight.train.size() == 6);
  CHECK(eight.val.size() == 2);
  const auto hundred = split_train_val(iota_indices(100), 1);
  CHECK(hundred.train.size() == 75);
  CHECK(hundred.val.size() == 25);

  Rng rng(4);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 2 + rng.below(300);
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = 1000 + 3 * i;  // not 0..n-1
    const auto split = split_train_val(idx, trial);
    std::set<std::size_t> all(split.train.begin(), split.train.end());
    all.insert(split.val.begin(), split.val.end());
    CHECK(split.train.size() + split.val.size() == n);
    CHECK(all == std::set<std::size_t>(idx.begin(), idx.end()));
    CHECK(split.train.size() == (3 * n + 2) / 4);
  }
}

TEST_CASE("load_csv") {
  const auto dir = test_util::scratch_dir("csv");
  SUBCASE("log response") {
    const auto path = dir / "two.csv";
    std::ofstream(path) << "a,mhv\n0.5,1\n0.25," << std::setprecision(17) << std::numbers::e << "\n";
    const auto data = load_csv(path, "mhv", true);
    REQUIRE(data.size() == 2);
    CHECK(data.y[0] == 0.0);
    CHECK(data.y[1] == Approx(1.0).epsilon(1e-15));
    CHECK(data.feature_names == std::vector<std::string>{"a"});
    CHECK(data.X(1, 0) == 0.25);
  }
  SUBCASE("missing column") {
    const auto path = dir / "two.csv";
    std::ofstream(path) << "a,b\n1,2\n";
    CHECK_THROWS_AS((void)load_csv(path, "mhv"), DataError);
  }
  SUBCASE("unparsable cell names its row and column") {
    const auto path = dir / "bad.csv";
    std::ofstream(path) << "a,b,y\n1,2,3\n4,abc,6\n";
    const auto msg = error_message([&] { (void)load_csv(path, "y"); });
    CHECK(msg.find("line 3") != std::string::npos);
    CHECK(msg.find("'b'") != std::string::npos);
    CHECK(msg.find("abc") != std::string::npos);
  }
  SUBCASE("other malformed input") {
    const auto path = dir / "bad.csv";
    std::ofstream(path) << "a,y\n1,2,3\n";
    CHECK_THROWS_AS((void)load_csv(path, "y"), DataError);
    std::ofstream(path) << "a,y\n1,nan\n";
    CHECK_THROWS_AS((void)load_csv(path, "y"), DataError);
    std::ofstream(path) << "a,y\n1,-2\n";
    CHECK_THROWS_AS((void)load_csv(path, "y", true), DataError);
    CHECK_NOTHROW((void)load_csv(path, "y", false));
    CHECK_THROWS_AS((void)load_csv(dir / "absent.csv", "y"), DataError);
  }
  SUBCASE("header quoting, BOM and CRLF") {
    const auto path = dir / "win.csv";
    std::ofstream(path, std::ios::binary) << "\xEF\xBB\xBF\"x\", \"y\"\r\n1, 2\r\n3,4\r\n";
    const auto data = load_csv(path, "y");
    CHECK(data.feature_names == std::vector<std::string>{"x"});
    CHECK(data.y == std::vector<double>{2, 4});
  }
  SUBCASE("fixture and write round-trip") {
    const auto data = load_csv(DANN_FIXTURE_DIR "/housing50.csv", "MedHouseVal", true);
    CHECK(data.size() == 50);
    CHECK(data.dims() == 8);
    CHECK(data.feature_names.front() == "MedInc");
    write_csv(dir / "copy.csv", data);
    const auto again = load_csv(dir / "copy.csv", "MedHouseVal");
    CHECK(again.X == data.X);
    CHECK(again.y == data.y);
  }
}

TEST_CASE("Dataset subset and validate") {
  const auto data = gen_model(1, 10, 2);
  const std::vector<std::size_t> pick{7, 2};
  const auto sub = data.subset(pick);
  CHECK(sub.size() == 2);
  CHECK(sub.y[0] == data.y[7]);
  CHECK(sub.X(1, 3) == data.X(2, 3));
  auto broken = data;
  broken.y[4] = INFINITY;
  CHECK_THROWS_AS(broken.validate(), DataError);
}
