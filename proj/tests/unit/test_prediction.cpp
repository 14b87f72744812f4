#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "oracles.hpp"
#include "tsar/distributions.hpp"
#include "tsar/errors.hpp"
#include "tsar/prediction.hpp"
#include "tsar/sim_study.hpp"

using namespace tsar;

namespace {

ErrorCode code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::domain_error;
}

}  // namespace

TEST_CASE("out-of-sample weights") {
  const auto pts = oracle::equator3();
  auto w = oos_weights({0.0, 0.5}, pts, ProximityScheme::knn(2));
  REQUIRE(w.size() == 2);
  CHECK(w[0].index == 0);
  CHECK(w[1].index == 1);
  CHECK(w[0].weight == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(w[0].weight + w[1].weight == doctest::Approx(1.0).epsilon(1e-10));

  w = oos_weights({0.0, 3.0}, pts, ProximityScheme::radius(150.0));
  REQUIRE(w.size() == 1);
  CHECK(w[0].index == 2);
  CHECK(w[0].weight == 1.0);

  w = oos_weights({0.0, 1.0}, pts, ProximityScheme::radius(150.0), std::size_t{1});
  CHECK(w.size() == 2);
  CHECK(w[0].weight == doctest::Approx(0.5));

  CHECK(code_of([&] { oos_weights({0.0, 5.0}, pts, ProximityScheme::radius(100.0)); }) ==
        ErrorCode::isolated_site);
  CHECK(code_of([&] { oos_weights({0.0, 1.0}, pts, ProximityScheme::knn(1)); }) ==
        ErrorCode::duplicate_location);
}

TEST_CASE("in-sample site reproduces the proximity row") {
  std::mt19937_64 rng(3);
  const auto pts = oracle::random_points(50, rng);
  for (const auto& scheme : {ProximityScheme::knn(6), ProximityScheme::radius(900.0)}) {
    const auto w = build_proximity(pts, scheme);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const auto o = oos_weights(pts[i], pts, scheme, i);
      const auto row = w.row(i);
      REQUIRE(o.size() == row.size());
      for (std::size_t k = 0; k < o.size(); ++k) {
        CHECK(o[k].index == row[k].index);
        CHECK(o[k].weight == doctest::Approx(row[k].weight).epsilon(1e-14));
      }
    }
  }
}

TEST_CASE("local residual variance") {
  Eigen::VectorXd r(4);
  r << 0.0, 2.0, 9.0, 9.0;
  std::vector<Neighbor> nb{{0, 0.5}, {1, 0.5}};
  CHECK(oos_sigma2(r, nb) == doctest::Approx(2.0));
  CHECK(oos_sigma2((r.array() + 3.3).matrix(), nb) == doctest::Approx(2.0).epsilon(1e-12));
  std::vector<Neighbor> flat{{2, 0.5}, {3, 0.5}};
  CHECK(code_of([&] { oos_sigma2(r, flat); }) == ErrorCode::degenerate_variance);
  std::vector<Neighbor> one{{0, 1.0}};
  CHECK(code_of([&] { oos_sigma2(r, one); }) == ErrorCode::neighborhood_too_small);
}

TEST_CASE("out-of-sample point prediction") {
  FitArtifact fit;
  fit.beta = Eigen::Vector2d(1.0, 2.0);
  fit.lambda = 0.5;
  Eigen::MatrixXd x(3, 2);
  x << 1, 0, 1, 1, 1, 2;
  Eigen::VectorXd y(3);
  y << 2.0, 2.0, 7.0;  // deviations 1, -1, 2
  OosSite site;
  site.x = Eigen::Vector2d(1.0, 0.5);
  site.weights = {{0, 0.25}, {2, 0.75}};
  CHECK(oos_predict(fit, site, y, x) ==
        doctest::Approx(2.0 + 0.5 * (0.25 * 1.0 + 0.75 * 2.0)).epsilon(1e-12));
  fit.lambda = 0.0;
  CHECK(oos_predict(fit, site, y, x) == 2.0);
  site.x = Eigen::Vector3d(1, 2, 3);
  CHECK(code_of([&] { oos_predict(fit, site, y, x); }) == ErrorCode::dimension_mismatch);
}

TEST_CASE("confidence intervals") {
  FitArtifact sar;
  sar.sigma = 1.3;
  FitArtifact t = sar;
  t.family = ModelFamily::tsar;
  t.nu = 6.0;
  const auto a = confidence_interval(4.0, 2.0, sar, 0.01);
  const auto b = confidence_interval(4.0, 2.0, t, 0.01);
  CHECK(a.hi - a.point == doctest::Approx(a.point - a.lo));
  CHECK(a.hi - a.point == doctest::Approx(2.5758 * 1.3 * std::sqrt(2.0)).epsilon(1e-4));
  CHECK((b.hi - b.point) / (a.hi - a.point) == doctest::Approx(3.7074 / 2.5758).epsilon(1e-4));
  CHECK(confidence_interval(4.0, 2.0, sar, 0.9999).hi - 4.0 < 1e-3);
  // nesting
  const auto wide = confidence_interval(4.0, 2.0, t, 0.01);
  const auto narrow = confidence_interval(4.0, 2.0, t, 0.1);
  CHECK(wide.lo <= narrow.lo);
  CHECK(wide.hi >= narrow.hi);
  CHECK_THROWS_AS(confidence_interval(0.0, 1.0, sar, 1.0), Error);
  CHECK_THROWS_AS(confidence_interval(0.0, 1.0, sar, 0.0), Error);
}

TEST_CASE("back-transformed intervals are monotone images") {
  FitArtifact fit;
  fit.sigma = 0.8;
  const BoxCoxSpec spec{10.0, 0.5};
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> pt(1.0, 8.0), obs(-5.0, 40.0);
  std::size_t in_t = 0, in_o = 0;
  for (int k = 0; k < 200; ++k) {
    const auto ci = confidence_interval(pt(rng), 1.5, fit, 0.1);
    const auto orig = to_original_scale(ci, spec);
    CHECK(orig.scale == PredictionScale::original);
    CHECK(orig.lo <= orig.point);
    CHECK(orig.point <= orig.hi);
    const double y = obs(rng);
    const double v = boxcox(y, spec.m, spec.l);
    in_t += ci.lo <= v && v <= ci.hi;
    in_o += orig.lo <= y && y <= orig.hi;
  }
  CHECK(in_t == in_o);
}

TEST_CASE("k-fold partition") {
  auto f = kfold_partition(10, 10, 4);
  CHECK(std::set<std::size_t>(f.begin(), f.end()).size() == 10);
  f = kfold_partition(103, 10, 4);
  std::vector<int> sizes(10, 0);
  for (auto k : f) ++sizes[k];
  CHECK(*std::max_element(sizes.begin(), sizes.end()) - *std::min_element(sizes.begin(), sizes.end()) <= 1);
  CHECK(kfold_partition(103, 10, 4) == f);
  CHECK(kfold_partition(103, 10, 5) != f);
  CHECK_THROWS_AS(kfold_partition(5, 10, 1), Error);
  CHECK_THROWS_AS(kfold_partition(5, 1, 1), Error);
}

TEST_CASE("coverage") {
  std::vector<IntervalPrediction> iv(4);
  for (auto& i : iv) {
    i.lo = 0.0;
    i.hi = 1.0;
  }
  Eigen::VectorXd y(4);
  y << 0.5, 0.0, 1.0, 0.2;
  CHECK(coverage(y, iv) == 1.0);
  y << 2, 3, -1, 5;
  CHECK(coverage(y, iv) == 0.0);
  y << 0.5, 3, -1, 0.7;
  CHECK(coverage(y, iv) == 0.5);
  CHECK_THROWS_AS(coverage(Eigen::VectorXd::Zero(3), iv), Error);
}

TEST_CASE("binomial likelihood-ratio test") {
  auto r = binomial_lrt(10, 1000, 0.01);
  CHECK(r.statistic == 0.0);
  CHECK(r.p_value == 1.0);
  r = binomial_lrt(0, 100, 0.05);
  CHECK(r.statistic == doctest::Approx(-200.0 * std::log(0.95)).epsilon(1e-12));
  CHECK(r.statistic == doctest::Approx(10.259).epsilon(1e-4));
  CHECK(r.p_value == doctest::Approx(0.00136).epsilon(1e-2));
  r = binomial_lrt(32, 1542, 0.01);
  CHECK(r.p_value > 0.0001);
  CHECK(r.p_value < 0.0004);
  // p-value falls as k moves away from alpha n
  double prev = 1.0;
  for (std::size_t k = 51; k <= 120; ++k) {
    const double p = binomial_lrt(k, 1000, 0.05).p_value;
    CHECK(p < prev);
    prev = p;
  }
  prev = 1.0;
  for (int k = 49; k >= 0; --k) {
    const double p = binomial_lrt(static_cast<std::size_t>(k), 1000, 0.05).p_value;
    CHECK(p < prev);
    prev = p;
  }
  CHECK_THROWS_AS(binomial_lrt(5, 4, 0.1), Error);
  CHECK_THROWS_AS(binomial_lrt(1, 4, 1.5), Error);
}

TEST_CASE("cross-validation on simulated tSAR data") {
  auto rng = make_rng(31, 0);
  const auto pts = sample_locations(400, Window{}, rng);
  const SpatialWeights w(knn_proximity(pts, 30));
  Eigen::VectorXd beta(8);
  beta << 3, 10, 4, 5, 2, 8, 1, 3;
  const auto d = simulate_tsar(beta, 0.8, 4.0, pts, RegionPartition{}, w.op, rng);
  CrossValidationOptions o;
  o.seed = 3;
  o.alphas = {0.1, 0.01};
  const auto r = cross_validate(pts, d.y, d.x, o);
  CHECK(r.rows.size() == 4);
  const auto& t90 = r.row(ModelFamily::tsar, 0.1);
  CHECK(t90.coverage > 0.8);
  CHECK(t90.coverage < 0.97);
  CHECK(r.row(ModelFamily::tsar, 0.01).coverage >= t90.coverage);
  CHECK(t90.n == 400);
  CHECK_THROWS_AS(r.row(ModelFamily::tsar, 0.2), Error);
}
