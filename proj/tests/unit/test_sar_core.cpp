#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "tsar/errors.hpp"
#include "tsar/sar_core.hpp"
#include "tsar/sim_study.hpp"

using namespace tsar;

namespace {

// SAR data with Gaussian errors on random locations.
struct SarData {
  std::vector<GeoPoint> points;
  Eigen::MatrixXd x;
  Eigen::VectorXd y;
};

SarData simulate_sar(std::size_t n, double lambda, std::uint64_t seed, const SpatialOperator** op_out,
                     std::unique_ptr<SpatialWeights>& holder) {
  auto rng = make_rng(seed, 0);
  SarData d;
  d.points = sample_locations(n, Window{}, rng);
  holder = std::make_unique<SpatialWeights>(knn_proximity(d.points, 10));
  std::normal_distribution<double> z;
  d.x.resize(static_cast<Eigen::Index>(n), 3);
  Eigen::VectorXd eps(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < d.x.rows(); ++i) {
    d.x(i, 0) = 1.0;
    d.x(i, 1) = z(rng);
    d.x(i, 2) = z(rng);
    eps[i] = z(rng);
  }
  d.y = d.x * Eigen::Vector3d(1.0, 2.0, -1.0) + holder->op.solve(lambda, eps);
  *op_out = &holder->op;
  return d;
}

}  // namespace

TEST_CASE("quadratic form") {
  std::mt19937_64 rng(1);
  auto in = oracle::random_instance(3, 2, rng);
  const SpatialOperator op(in.w);
  const auto scale = oracle::scale_of(in);
  const Eigen::VectorXd u = in.y;
  CHECK(sigma_y_inv_form(Eigen::VectorXd::Zero(3), in.lambda, op, scale) == 0.0);
  CHECK(sigma_y_inv_form(u, 0.0, op, ErrorScale::identity(3)) == doctest::Approx(u.squaredNorm()));
  const double dense = u.dot(oracle::sigma_y(in.w, in.scale, in.lambda).inverse() * u);
  CHECK(sigma_y_inv_form(u, in.lambda, op, scale) == doctest::Approx(dense).epsilon(1e-10));
}

TEST_CASE("gls estimator") {
  std::mt19937_64 rng(2);
  auto in = oracle::random_instance(4, 2, rng);
  const SpatialOperator op(in.w);
  const auto scale = oracle::scale_of(in);
  const Eigen::VectorXd b = gls_beta(in.y, in.x, in.lambda, op, scale);
  CHECK((b - oracle::gls(in, in.lambda)).norm() < 1e-9);

  const Eigen::VectorXd ols = in.x.colPivHouseholderQr().solve(in.y);
  CHECK((gls_beta(in.y, in.x, 0.0, op, ErrorScale::identity(4)) - ols).norm() < 1e-10);

  const Eigen::VectorXd exact = in.x * in.beta;
  for (double lambda : {-0.8, 0.1, 0.9}) {
    CHECK((gls_beta(exact, in.x, lambda, op, scale) - in.beta).norm() < 1e-10);
  }
}

TEST_CASE("sigma estimate") {
  std::mt19937_64 rng(3);
  auto in = oracle::random_instance(3, 2, rng);
  const SpatialOperator op(in.w);
  const auto scale = oracle::scale_of(in);
  CHECK(sar_sigma2(in.x * in.beta, in.x, in.beta, in.lambda, op, scale) == doctest::Approx(0.0));
  const Eigen::VectorXd r = in.y - in.x * in.beta;
  CHECK(sar_sigma2(in.y, in.x, in.beta, 0.0, op, ErrorScale::identity(3)) ==
        doctest::Approx(r.squaredNorm() / 3));
  const double dense = r.dot(oracle::sigma_y(in.w, in.scale, in.lambda).inverse() * r) / 3;
  CHECK(sar_sigma2(in.y, in.x, in.beta, in.lambda, op, scale) == doctest::Approx(dense).epsilon(1e-10));
}

TEST_CASE("negative log-likelihood") {
  // single observation with no neighbours is a standard normal at 0
  const SpatialOperator single(Eigen::MatrixXd::Zero(1, 1));
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(1);
  const Eigen::MatrixXd one = Eigen::MatrixXd::Ones(1, 1);
  CHECK(sar_nll(zero, one, zero, 1.0, 0.0, single, ErrorScale::identity(1)) ==
        doctest::Approx(0.918939).epsilon(1e-6));

  std::mt19937_64 rng(4);
  for (int rep = 0; rep < 30; ++rep) {
    auto in = oracle::random_instance(2 + rep % 5, 2, rng);
    const SpatialOperator op(in.w);
    CHECK(sar_nll(in.y, in.x, in.beta, in.sigma, in.lambda, op, oracle::scale_of(in)) ==
          doctest::Approx(oracle::gaussian_nll(in)).epsilon(1e-10));
  }
  CHECK_THROWS_AS(sar_nll(zero, one, zero, 0.0, 0.0, single, ErrorScale::identity(1)), Error);
}

TEST_CASE("profile likelihood composes the estimators") {
  std::mt19937_64 rng(5);
  auto in = oracle::random_instance(5, 2, rng);
  const SpatialOperator op(in.w);
  const auto scale = oracle::scale_of(in);
  for (double lambda : {-0.5, 0.3, 0.8}) {
    const Eigen::VectorXd b = oracle::gls(in, lambda);
    const Eigen::VectorXd r = in.y - in.x * b;
    const double s2 = r.dot(oracle::sigma_y(in.w, in.scale, lambda).inverse() * r) / 5;
    auto at = in;
    at.beta = b;
    at.sigma = std::sqrt(s2);
    at.lambda = lambda;
    CHECK(sar_profile_nll(lambda, in.y, in.x, op, scale) ==
          doctest::Approx(oracle::gaussian_nll(at)).epsilon(1e-10));
  }
}

TEST_CASE("fit_sar optimality and fixed point") {
  std::unique_ptr<SpatialWeights> holder;
  const SpatialOperator* op = nullptr;
  const auto d = simulate_sar(200, 0.6, 17, &op, holder);
  const auto scale = ErrorScale::identity(200);
  const auto fit = fit_sar(d.y, d.x, *op, scale);
  const double best = sar_profile_nll(fit.lambda, d.y, d.x, *op, scale);
  CHECK(fit.loglik == doctest::Approx(-best));
  for (int k = 0; k <= 200; ++k) {
    const double lambda = kLambdaLower + (kLambdaUpper - kLambdaLower) * k / 200.0;
    CHECK(best <= sar_profile_nll(lambda, d.y, d.x, *op, scale) + 1e-6);
  }
  const Eigen::VectorXd again = gls_beta(d.y, d.x, fit.lambda, *op, scale);
  CHECK((again - fit.beta).norm() <= 1e-12 * fit.beta.norm());

  // residual identity and relation to fitted values
  const Eigen::VectorXd eps = op->apply(fit.lambda, Eigen::VectorXd(d.y - d.x * fit.beta));
  CHECK((fit.residuals - eps).cwiseAbs().maxCoeff() < 1e-10);
  CHECK((fit.residuals - (d.y - fit.fitted)).cwiseAbs().maxCoeff() == 0.0);
  CHECK(fit.s_hat == fit.sigma);
  CHECK(fit.parameter_count() == 5);
  CHECK(std::abs(fit.lambda - 0.6) < 0.2);
}

TEST_CASE("fit_sar scale equivariance") {
  std::unique_ptr<SpatialWeights> holder;
  const SpatialOperator* op = nullptr;
  const auto d = simulate_sar(150, 0.4, 23, &op, holder);
  const auto scale = ErrorScale::identity(150);
  const auto a = fit_sar(d.y, d.x, *op, scale);
  const auto b = fit_sar(Eigen::VectorXd(3.0 * d.y), d.x, *op, scale);
  CHECK(std::abs(a.lambda - b.lambda) < 1e-5);
  CHECK((b.beta - 3.0 * a.beta).norm() < 1e-5 * b.beta.norm());
  CHECK(b.sigma == doctest::Approx(3.0 * a.sigma).epsilon(1e-5));
}

TEST_CASE("fit_sar consistency at lambda 0") {
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    std::unique_ptr<SpatialWeights> holder;
    const SpatialOperator* op = nullptr;
    const auto d = simulate_sar(1500, 0.0, seed, &op, holder);
    const auto fit = fit_sar(d.y, d.x, *op, ErrorScale::identity(1500));
    CHECK(std::abs(fit.lambda) < 0.1);
  }
}

TEST_CASE("local predictions") {
  const auto w = knn_proximity(oracle::equator3(), 2);
  const SpatialOperator op(w);
  Eigen::MatrixXd x(3, 2);
  x << 1, 0, 1, 1, 1, 2;
  const Eigen::Vector2d beta(1.0, 2.0);
  Eigen::VectorXd y(3);
  y << 2.0, 2.0, 7.0;
  const Eigen::VectorXd trend = x * beta;  // (1, 3, 5)
  const Eigen::VectorXd pred = local_predictions(beta, 0.5, y, x, op);
  // row 1 has neighbours 0 and 2 with equal weights; deviations 1 and 2
  CHECK(pred[1] == doctest::Approx(3.0 + 0.5 * (0.5 * 1.0 + 0.5 * 2.0)));
  // row 0: weights (2/3, 1/3) on rows 1 and 2; deviations -1 and 2
  CHECK(pred[0] == doctest::Approx(1.0 + 0.5 * (2.0 / 3.0 * -1.0 + 1.0 / 3.0 * 2.0)));
  CHECK((local_predictions(beta, 0.0, y, x, op) - trend).norm() == 0.0);
  CHECK((local_predictions(beta, 0.7, trend, x, op) - trend).norm() < 1e-15);
}

TEST_CASE("coefficient tests") {
  std::mt19937_64 rng(6);
  auto in = oracle::random_instance(4, 2, rng);
  const SpatialOperator op(in.w);
  const GlsSystem system(in.y, in.x, op, oracle::scale_of(in));
  Eigen::VectorXd beta = in.beta;
  beta[1] = 0.0;
  const auto t = coefficient_tests(beta, in.sigma, in.lambda, 1.0, system);
  CHECK(t.z[1] == 0.0);
  CHECK(t.p[1] == 1.0);
  const Eigen::MatrixXd cov =
      (in.x.transpose() * oracle::sigma_y(in.w, in.scale, in.lambda).inverse() * in.x).inverse();
  for (int i = 0; i < 2; ++i) {
    CHECK(t.se[i] == doctest::Approx(in.sigma * std::sqrt(cov(i, i))).epsilon(1e-9));
  }
  const auto t2 = coefficient_tests(beta, in.sigma, in.lambda, 2.0, system);
  CHECK(t2.se[0] == doctest::Approx(std::sqrt(2.0) * t.se[0]).epsilon(1e-14));
}

TEST_CASE("standardized residuals") {
  Eigen::VectorXd r(3);
  r << 1.0, -2.0, 4.0;
  const auto a = standardized_residuals(r, 2.0, ErrorScale::identity(3));
  CHECK(a[1] == doctest::Approx(-1.0));
  Eigen::VectorXd d(3);
  d << 4.0, 4.0, 4.0;
  const auto b = standardized_residuals(r, 1.0, ErrorScale::from_diagonal(d));
  CHECK((a - b).norm() < 1e-15);
}
