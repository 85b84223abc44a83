#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "speclaw/errors.hpp"
#include "speclaw/io.hpp"
#include "speclaw/verify.hpp"

using namespace speclaw;

namespace {

WignerSpec wigner(int n, std::uint64_t seed = 0) {
  WignerSpec s;
  s.n = n;
  s.profile = VarianceProfile::constant(n);
  s.seed = seed;
  return s;
}

LocalLawConfig dense_config(int n, int trials) {
  LocalLawConfig cfg;
  cfg.ensemble = wigner(n);
  cfg.trials = trials;
  cfg.interval_length = 0.2;
  return cfg;
}

ErrorKind kind_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::Config;
}

}  // namespace

TEST_CASE("config validation and interval length") {
  LocalLawConfig cfg = dense_config(1000, 2);
  CHECK_NOTHROW(cfg.validate());
  CHECK(cfg.resolved_interval_length() == 0.2);
  cfg.interval_length.reset();
  CHECK(cfg.resolved_interval_length() == doctest::Approx(std::log(1000.0) / 1000.0));
  cfg.ensemble = SparseSpec{wigner(1000), 0.1};
  cfg.interval_len_factor = 2.0;
  CHECK(cfg.resolved_interval_length() == doctest::Approx(2.0 * std::log(1000.0) / 100.0));
  cfg.delta = 0.0;
  CHECK(kind_of([&] { cfg.validate(); }) == ErrorKind::Config);
}

TEST_CASE("midpoint placement") {
  const std::vector<BulkInterval> bulk{{-1.0, 0.0, 0.1}, {0.5, 2.5, 0.1}};
  auto mids = place_midpoints(bulk, 3, 0.2);
  REQUIRE(mids.size() == 3);
  CHECK(mids[0] == doctest::Approx(0.5 + 0.1 + 0.2));
  CHECK(mids[2] == doctest::Approx(2.5 - 0.1 - 0.2));
  CHECK(mids[1] == doctest::Approx(1.5));
  // Short bulk: inset shrinks but intervals stay inside.
  mids = place_midpoints({{0.0, 1.0, 0.1}}, 2, 0.6);
  CHECK(mids[0] - 0.3 > 0.0);
  CHECK(mids[1] + 0.3 < 1.0);
  CHECK(kind_of([] { place_midpoints({{0.0, 0.1, 0.1}}, 1, 0.5); }) == ErrorKind::EmptyBulk);
  CHECK(kind_of([] { place_midpoints({}, 1, 0.5); }) == ErrorKind::EmptyBulk);
}

TEST_CASE("local law report on a small dense ensemble") {
  const LocalLawConfig cfg = dense_config(400, 4);
  const auto r = verify_local_law(cfg);
  CHECK(r.n == 400);
  CHECK(r.ensemble_type == "wigner");
  CHECK(r.intervals.size() == 3);
  CHECK(r.trial_max_deviation.size() == 4);
  for (const auto& rec : r.intervals) {
    CHECK(rec.hi - rec.lo == doctest::Approx(0.2));
    CHECK(rec.observed.size() == 4);
    for (std::size_t t = 0; t < 4; ++t) {
      CHECK(rec.deviation[t] == std::abs(rec.observed[t] - rec.predicted) / (400 * (rec.hi - rec.lo)));
    }
  }
  CHECK(r.pass_fraction >= 0.0);
  CHECK(r.pass_fraction <= 1.0);
  CHECK(r.profile_hash == profile_hash(VarianceProfile::constant(400)));
  CHECK_FALSE(r.pilot_max_deviation);
  // Identical config reproduces the report byte for byte.
  CHECK(report_to_json(r).dump() == report_to_json(verify_local_law(cfg)).dump());
}

TEST_CASE("thread count does not change reports") {
  LocalLawConfig cfg = dense_config(200, 5);
  cfg.threads = 1;
  const auto one = report_to_json(verify_local_law(cfg)).dump();
  cfg.threads = 3;
  CHECK(report_to_json(verify_local_law(cfg)).dump() == one);
}

TEST_CASE("pilot trials use disjoint seeds") {
  LocalLawConfig cfg = dense_config(200, 3);
  cfg.pilot_trials = 2;
  const auto r = verify_local_law(cfg);
  REQUIRE(r.pilot_max_deviation);
  CHECK(r.pilot_trials == 2);
  cfg.pilot_trials = 0;
  CHECK(verify_local_law(cfg).trial_max_deviation == r.trial_max_deviation);
}

TEST_CASE("sparse pipeline with p = 1 equals the dense pipeline") {
  LocalLawConfig dense = dense_config(300, 3);
  LocalLawConfig sparse = dense;
  sparse.ensemble = SparseSpec{wigner(300), 1.0};
  const auto a = verify_local_law(dense);
  const auto b = verify_local_law(sparse);
  CHECK(a.trial_max_deviation == b.trial_max_deviation);
  for (std::size_t k = 0; k < a.intervals.size(); ++k) CHECK(a.intervals[k].observed == b.intervals[k].observed);
}

TEST_CASE("SBM with equal probabilities predicts the semicircle") {
  SbmSpec sbm;
  sbm.sizes = {200, 200};
  sbm.probs = Eigen::Matrix2d::Constant(0.1);
  LocalLawConfig cfg;
  cfg.ensemble = sbm;
  cfg.trials = 2;
  const auto pred = predict(cfg);
  LocalLawConfig dense = dense_config(400, 2);
  const auto ref = predict(dense);
  for (std::size_t i = 0; i < pred.curve.values.size(); ++i) {
    CHECK(pred.curve.values[i] == doctest::Approx(ref.curve.values[i]).epsilon(1e-9));
  }
}

TEST_CASE("empty bulk is reported") {
  LocalLawConfig cfg = dense_config(100, 1);
  cfg.eps = 10.0;
  CHECK(kind_of([&] { verify_local_law(cfg); }) == ErrorKind::EmptyBulk);
}

TEST_CASE("Stieltjes closeness") {
  LocalLawConfig cfg = dense_config(400, 3);
  const auto far = verify_stieltjes_closeness(cfg, {10.0});
  CHECK(far.max_sup <= 1e-2);
  const auto near = verify_stieltjes_closeness(cfg, {0.5, 0.1});
  CHECK(near.points.size() == 6);
  CHECK(near.median_sup <= near.max_sup);
  CHECK(near.max_sup < 0.2);
  CHECK(kind_of([&] { verify_stieltjes_closeness(cfg, {1e-4}); }) == ErrorKind::InvalidArgument);
  CHECK_NOTHROW(verify_stieltjes_closeness(cfg, {1e-2}, 1e-3));
}

TEST_CASE("delocalization records") {
  // Standard basis eigenvectors: the localized extreme.
  const int n = 100;
  Eigen::MatrixXd d = Eigen::VectorXd::LinSpaced(n, 1.0, double(n)).asDiagonal();
  const auto s = eigen_full(d, true);
  const auto rec = delocalization_record(s, {}, 1.0, 1.0);
  CHECK(rec.bulk_count == n);
  CHECK(rec.max_ratio == doctest::Approx(std::sqrt(double(n) / std::log(double(n)))));
  CHECK(kind_of([&] { delocalization_record(eigen_full(d, false), {}, 1.0, 1.0); }) == ErrorKind::MissingVectors);

  LocalLawConfig cfg = dense_config(300, 3);
  const auto r = verify_delocalization(cfg);
  CHECK(r.trials.size() == 3);
  const double floor = 1.0 / std::sqrt(std::log(300.0));
  for (const auto& t : r.trials) {
    CHECK(t.bulk_count > 200);
    for (double v : t.ratios) CHECK(v >= floor - 1e-12);
  }
  CHECK(r.median_ratio <= r.q90_ratio);
  CHECK(r.q90_ratio <= r.q99_ratio);
  CHECK(r.q99_ratio <= r.max_ratio);
  CHECK(r.max_ratio < 3.0);
}

TEST_CASE("quantiles") {
  CHECK(quantile({3.0, 1.0, 2.0}, 0.5) == 2.0);
  CHECK(quantile({1.0, 2.0}, 0.5) == 1.5);
  CHECK(quantile({5.0}, 0.99) == 5.0);
  CHECK_THROWS_AS(quantile({}, 0.5), Error);
}

TEST_CASE("projection test: full basis and isotropic centre") {
  ProjectionTestSpec full;
  full.n = 40;
  full.subspace_dim = 40;
  full.sigma = Eigen::VectorXd::Ones(40);
  full.weights = Eigen::VectorXd::Ones(40);
  full.t_grid = {10.0};
  full.trials = 1000;
  const auto t = projection_concentration_test(full);
  CHECK(t.failure_rate[0] == 0.0);
  CHECK(t.center == doctest::Approx(40.0));

  ProjectionTestSpec half = full;
  half.subspace_dim = 20;
  half.weights = Eigen::VectorXd::Ones(20);
  half.t_grid = {0.5, 1.0, 2.0, 3.0};
  const auto h = projection_concentration_test(half);
  CHECK(h.center == doctest::Approx(20.0));
  CHECK(h.monotone);
  CHECK(h.k_bound == 1.0);

  half.weights(0) = 2.0;
  CHECK(kind_of([&] { projection_concentration_test(half); }) == ErrorKind::Config);
}

TEST_CASE("projection test with mixed variances decays") {
  ProjectionTestSpec spec;
  spec.n = 400;
  spec.subspace_dim = 100;
  spec.sigma = Eigen::VectorXd::Ones(400);
  for (int i = 0; i < 400; i += 2) spec.sigma(i) = 0.25;
  spec.weights = Eigen::VectorXd::Ones(100);
  spec.t_grid = {0.5, 1.0, 2.0, 3.0};
  spec.trials = 4000;
  const auto t = projection_concentration_test(spec);
  CHECK(t.monotone);
  CHECK(t.failure_rate.back() <= 0.01);
}

TEST_CASE("interlacing") {
  const Eigen::MatrixXd a = Eigen::MatrixXd::Zero(5, 5);
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(5, 5);
  CHECK(interlacing_shift(a, b, {{-1.0, 1.0}}) == 0);
  b(0, 0) = 1.0;
  CHECK(interlacing_shift(a, b, {{0.5, 1.5}}) == 1);
  const auto r = interlacing_test(100, 30, 9, 5);
  CHECK(r.violations == 0);
  CHECK(r.max_shift_by_rank[1] <= 1);
  for (int k = 1; k <= 5; ++k) CHECK(r.max_shift_by_rank[k] <= k);
}
