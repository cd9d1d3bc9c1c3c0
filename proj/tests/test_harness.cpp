#include <doctest.h>

#include <cmath>
#include <limits>
#include <set>

#include "dann/data.hpp"
#include "dann/errors.hpp"
#include "dann/harness.hpp"

using namespace dann;
using doctest::Approx;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

RunRecord record(NetworkKind kind, double val, std::uint64_t n_params, double test = 0.0,
                 int sample = 0) {
  RunRecord r;
  r.spec.kind = kind;
  r.validation_error = val;
  r.test_error = test;
  r.n_params = n_params;
  r.sample_id = sample;
  return r;
}

GridSpec tiny_grid(NetworkKind kind, int d = 6) {
  GridSpec g;
  g.kind = kind;
  g.d = d;
  g.L = {1};
  g.p = {2, 3};
  g.q = {2};
  g.sigma = {ActivationKind::ReLU};
  g.basis = {BasisFamily::Polynomial};
  return g;
}

TrainConfig quick_config(std::uint64_t seed = 3) {
  TrainConfig c;
  c.learning_rate = 1e-2;
  c.batch_size = 64;
  c.max_epochs = 5;
  c.seed = seed;
  return c;
}

PreparedSplit model1_split(std::size_t n, std::uint64_t seed) {
  return prepare_split(gen_model(1, n, seed), gen_model(1, n / 2, seed + 1),
                       gen_model(1, n / 2, seed + 2));
}

}  // namespace

TEST_CASE("expand_grid cardinalities and order") {
  for (const auto kind : kAllNetworkKinds) {
    const auto paper = preset_grid(GridPreset::Paper, kind, 6);
    CHECK(expand_grid(paper).size() == (kind == NetworkKind::DNN ? 135u : 750u));
    const auto desk = preset_grid(GridPreset::Desk, kind, 6);
    CHECK(expand_grid(desk).size() == (kind == NetworkKind::DNN ? 4u : 16u));
  }
  GridSpec single = tiny_grid(NetworkKind::HDANN2);
  single.p = {5};
  const auto one = expand_grid(single);
  REQUIRE(one.size() == 1);
  CHECK(one[0].p == 5);
  CHECK(one[0].kind == NetworkKind::HDANN2);

  GridSpec g = tiny_grid(NetworkKind::DANN);
  g.L = {1, 2};
  g.basis = {BasisFamily::Polynomial, BasisFamily::Cosine};
  const auto specs = expand_grid(g);
  REQUIRE(specs.size() == 8);
  CHECK(specs[0].L == 1);
  CHECK(specs[0].basis == BasisFamily::Polynomial);
  CHECK(specs[1].basis == BasisFamily::Cosine);
  CHECK(specs[2].p == 3);
  CHECK(specs[4].L == 2);

  const auto dnn = expand_grid(tiny_grid(NetworkKind::DNN));
  for (const auto& s : dnn) {
    CHECK(s.q == 0);
    CHECK(s.basis == BasisFamily::Polynomial);
  }
  GridSpec empty = tiny_grid(NetworkKind::DANN);
  empty.q.clear();
  CHECK_THROWS_AS((void)expand_grid(empty), ConfigError);
}

TEST_CASE("select_best") {
  const std::vector<RunRecord> one{record(NetworkKind::DANN, 0.3, 10)};
  CHECK(select_best(one) == one[0]);
  const std::vector<RunRecord> two{record(NetworkKind::DANN, 0.5, 10), record(NetworkKind::DANN, 0.4, 10)};
  CHECK(select_best(two) == two[1]);
  const std::vector<RunRecord> tie{record(NetworkKind::DANN, 0.5, 100), record(NetworkKind::DANN, 0.5, 50)};
  CHECK(select_best(tie) == tie[1]);
  const std::vector<RunRecord> full_tie{record(NetworkKind::DANN, 0.5, 50, 1.0),
                                        record(NetworkKind::DANN, 0.5, 50, 2.0)};
  CHECK(select_best(full_tie)->test_error == 1.0);
  const std::vector<RunRecord> with_failed{record(NetworkKind::DANN, NAN, 1), record(NetworkKind::DANN, 0.9, 5)};
  CHECK(select_best(with_failed) == with_failed[1]);
  CHECK_FALSE(select_best(std::vector<RunRecord>{}).has_value());
}

TEST_CASE("select_small") {
  const std::vector<RunRecord> recs{record(NetworkKind::HDANN1, 0.3, 100),
                                    record(NetworkKind::HDANN1, 0.2, 500)};
  CHECK(select_small(recs, 0.4) == recs[0]);
  CHECK(select_small(recs, 0.25) == recs[1]);
  CHECK_FALSE(select_small(recs, 0.2).has_value());  // strict inequality
  CHECK_FALSE(select_small(recs, 0.1).has_value());
  CHECK(select_small(recs, kInf) == recs[0]);
  CHECK_FALSE(select_small(recs, -kInf).has_value());

  const std::vector<RunRecord> tie{record(NetworkKind::HDANN1, 0.3, 100), record(NetworkKind::HDANN1, 0.2, 100)};
  CHECK(select_small(tie, 0.4) == tie[1]);
}

TEST_CASE("summarize averages per-sample selections") {
  ReportBundle bundle;
  // Sample 0: HDANN2 beats DNN; sample 1: it does not (NA small).
  bundle.records = {
      record(NetworkKind::DNN, 0.50, 1000, 0.60, 0), record(NetworkKind::DNN, 0.40, 2000, 0.45, 0),
      record(NetworkKind::HDANN2, 0.30, 300, 0.33, 0), record(NetworkKind::HDANN2, 0.35, 100, 0.37, 0),
      record(NetworkKind::DNN, 0.20, 900, 0.21, 1), record(NetworkKind::HDANN2, 0.25, 50, 0.29, 1),
  };
  summarize(bundle);
  CHECK(bundle.selections.size() == 4);
  const auto row = [&](NetworkKind k, const std::string& which) {
    for (const auto& r : bundle.summary)
      if (r.kind == k && r.selection == which) return r;
    FAIL("missing summary row");
    return SummaryRow{};
  };
  CHECK(*row(NetworkKind::DNN, "best").avg_test_error == Approx((0.45 + 0.21) / 2).epsilon(1e-12));
  CHECK(*row(NetworkKind::HDANN2, "best").avg_test_error == Approx((0.33 + 0.29) / 2).epsilon(1e-12));
  const auto small = row(NetworkKind::HDANN2, "small");
  CHECK(small.samples == 1);
  CHECK(*small.avg_test_error == Approx(0.37).epsilon(1e-12));
  CHECK(*small.avg_n_params == 100.0);

  ReportBundle all_na;
  all_na.records = {record(NetworkKind::DNN, 0.1, 10), record(NetworkKind::DANN, 0.2, 5)};
  summarize(all_na);
  const auto& na = all_na.summary.back();
  CHECK(na.selection == "small");
  CHECK(na.samples == 0);
  CHECK_FALSE(na.avg_test_error.has_value());
}

TEST_CASE("run_grid") {
  const auto split = model1_split(200, 1);
  const auto specs = expand_grid(tiny_grid(NetworkKind::HDANN1));
  const auto config = quick_config();

  SUBCASE("one record per spec with matching counts") {
    const std::vector<NetworkSpec> one{specs[0]};
    const auto records = run_grid(one, split, config);
    REQUIRE(records.size() == 1);
    CHECK(records[0].n_params == param_count(specs[0]));
    CHECK(records[0].spec == specs[0]);
  }
  SUBCASE("deterministic and thread-count invariant") {
    RunOptions serial, parallel;
    serial.record_time = parallel.record_time = false;
    parallel.threads = 4;
    const auto a = run_grid(specs, split, config, serial);
    const auto b = run_grid(specs, split, config, serial);
    const auto c = run_grid(specs, split, config, parallel);
    CHECK(a == b);
    CHECK(a == c);
    CHECK(a[0].seed != a[1].seed);
  }
  SUBCASE("smoke run on four tiny specs") {
    std::vector<NetworkSpec> four;
    for (const auto kind : {NetworkKind::DNN, NetworkKind::DANN, NetworkKind::HDANN2, NetworkKind::HDANN3}) {
      const auto s = expand_grid(tiny_grid(kind));
      four.push_back(s[0]);
    }
    for (const auto& r : run_grid(four, split, config)) {
      CHECK(std::isfinite(r.validation_error));
      CHECK(r.validation_error > 0.0);
      CHECK(r.training_time_sec >= 0.0);
      CHECK_FALSE(r.failed());
    }
  }
}

TEST_CASE("run_seed separates its inputs") {
  std::set<std::uint64_t> seeds;
  for (int s = 0; s < 3; ++s)
    for (const auto kind : kAllNetworkKinds)
      for (std::size_t i = 0; i < 10; ++i) seeds.insert(run_seed(7, s, kind, i));
  CHECK(seeds.size() == 150);
  CHECK(run_seed(7, 0, NetworkKind::DNN, 0) == run_seed(7, 0, NetworkKind::DNN, 0));
}

TEST_CASE("simulation study with one sample") {
  SimulationStudy study;
  study.n_train = 120;
  study.n_val = 40;
  study.n_test = 40;
  study.n_monte_carlo = 1;
  std::vector<GridSpec> grids;
  for (const auto kind : kAllNetworkKinds) grids.push_back(tiny_grid(kind));
  RunOptions options;
  options.record_time = false;
  const auto bundle = run_simulation_study(study, grids, quick_config(), options);
  CHECK(bundle.records.size() == 2 + 4 * 2);
  CHECK(bundle.selections.size() == 5);
  for (const auto& sel : bundle.selections) CHECK(sel.best.has_value());
  CHECK_FALSE(bundle.any_failed());
  CHECK(bundle.records == run_simulation_study(study, grids, quick_config(), options).records);
}

TEST_CASE("k-fold study on the housing fixture") {
  const auto data = load_csv(DANN_FIXTURE_DIR "/housing50.csv", "MedHouseVal", true);
  std::vector<GridSpec> grids{tiny_grid(NetworkKind::DNN, 8), tiny_grid(NetworkKind::HDANN1, 8)};
  RunOptions options;
  options.record_time = false;
  const auto bundle = run_kfold_study(data, 2, grids, quick_config(), options);

  REQUIRE(bundle.folds.size() == 2);
  std::set<std::size_t> covered;
  for (const auto& fold : bundle.folds) {
    for (const auto i : fold.test) CHECK(covered.insert(i).second);
    std::set<std::size_t> used(fold.train.begin(), fold.train.end());
    used.insert(fold.val.begin(), fold.val.end());
    for (const auto i : fold.test) CHECK(used.count(i) == 0);
    CHECK(used.size() + fold.test.size() == data.size());

    // Scalers are recomputable from the training rows alone.
    const auto train = data.subset(fold.train);
    CHECK(fold.scaler_x == ScalerX::fit(train.X));
    CHECK(fold.scaler_y == ScalerY::fit(train.y));
  }
  CHECK(covered.size() == data.size());
  CHECK_FALSE(bundle.folds[0].scaler_x == bundle.folds[1].scaler_x);
  CHECK(bundle.records.size() == 2 * (2 + 2));
  CHECK(bundle.records == run_kfold_study(data, 2, grids, quick_config(), options).records);
  CHECK_THROWS_AS((void)run_kfold_study(data, 1, grids, quick_config(), options), ConfigError);
}
