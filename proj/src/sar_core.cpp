#include "tsar/sar_core.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "tsar/distributions.hpp"
#include "tsar/errors.hpp"

namespace tsar {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

// nll given the quadratic form q = (y - X b)^T Sigma_Y^{-1} (y - X b)
double gaussian_nll(double n, double sigma2, double q, double half_log_det_scale,
                    double log_abs_det_filter) {
  return 0.5 * n * kLog2Pi + 0.5 * n * std::log(sigma2) + half_log_det_scale -
         log_abs_det_filter + q / (2.0 * sigma2);
}

}  // namespace

std::string_view family_name(ModelFamily family) {
  return family == ModelFamily::sar ? "sar" : "tsar";
}

int FitArtifact::parameter_count() const {
  return static_cast<int>(beta.size()) + 2 + (nu && nu_estimated ? 1 : 0);
}

double sigma_y_inv_form(const Eigen::VectorXd& u, double lambda, const SpatialOperator& op,
                        const ErrorScale& scale) {
  check_lambda(lambda);
  if (scale.size() != op.size()) fail(ErrorCode::dimension_mismatch, "Sigma_eps and W differ");
  const Eigen::VectorXd v = op.apply(lambda, u);
  return (v.array().square() / scale.diag.array()).sum();
}

Eigen::VectorXd gls_beta(const Eigen::VectorXd& y, const Eigen::MatrixXd& x, double lambda,
                         const SpatialOperator& op, const ErrorScale& scale) {
  check_lambda(lambda);
  return GlsSystem(y, x, op, scale).solve(lambda).beta;
}

double sar_sigma2(const Eigen::VectorXd& y, const Eigen::MatrixXd& x, const Eigen::VectorXd& beta,
                  double lambda, const SpatialOperator& op, const ErrorScale& scale) {
  check_dimensions(y, x, op, scale);
  if (beta.size() != x.cols()) fail(ErrorCode::dimension_mismatch, "beta length differs from X");
  return sigma_y_inv_form(y - x * beta, lambda, op, scale) / static_cast<double>(y.size());
}

double sar_nll(const Eigen::VectorXd& y, const Eigen::MatrixXd& x, const Eigen::VectorXd& beta,
               double sigma, double lambda, const SpatialOperator& op, const ErrorScale& scale) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    fail(ErrorCode::non_positive_sigma, "sigma = " + std::to_string(sigma));
  }
  check_dimensions(y, x, op, scale);
  if (beta.size() != x.cols()) fail(ErrorCode::dimension_mismatch, "beta length differs from X");
  const double q = sigma_y_inv_form(y - x * beta, lambda, op, scale);
  return gaussian_nll(static_cast<double>(y.size()), sigma * sigma, q,
                      0.5 * scale.diag.array().log().sum(), op.log_abs_det(lambda));
}

double sar_profile_nll(double lambda, const GlsSystem& system) {
  check_lambda(lambda);
  const auto sol = system.solve(lambda);
  const double n = static_cast<double>(system.n());
  const double sigma2 = sol.quadratic_form / n;
  return gaussian_nll(n, sigma2, sol.quadratic_form, system.half_log_det_scale(),
                      system.op().log_abs_det(lambda));
}

double sar_profile_nll(double lambda, const Eigen::VectorXd& y, const Eigen::MatrixXd& x,
                       const SpatialOperator& op, const ErrorScale& scale) {
  return sar_profile_nll(lambda, GlsSystem(y, x, op, scale));
}

FitArtifact fit_sar(const Eigen::VectorXd& y, const Eigen::MatrixXd& x, const SpatialOperator& op,
                    const ErrorScale& scale, const SarFitOptions& options) {
  const GlsSystem system(y, x, op, scale);
  BrentResult best;
  if (options.fixed_lambda) {
    check_lambda(*options.fixed_lambda);
    best.x = *options.fixed_lambda;
    best.value = sar_profile_nll(best.x, system);
    best.converged = true;
  } else {
    best = brent_minimize([&](double lambda) { return sar_profile_nll(lambda, system); },
                          kLambdaLower, kLambdaUpper, options.lambda_search);
  }

  FitArtifact fit;
  fit.family = ModelFamily::sar;
  fit.lambda = best.x;
  const auto sol = system.solve(fit.lambda);
  fit.beta = sol.beta;
  fit.sigma = std::sqrt(sol.quadratic_form / static_cast<double>(system.n()));
  if (!(fit.sigma > 0.0)) {
    fail(ErrorCode::optimizer_failure, "estimated sigma is zero (response fitted exactly)");
  }
  fit.loglik = -best.value;
  fit.lambda_tolerance = options.lambda_search.tolerance;
  if (!best.converged) fit.warnings.emplace_back("lambda search hit the iteration limit");
  detail::complete_fit(fit, system, y, x, scale);
  return fit;
}

Eigen::VectorXd local_predictions(const Eigen::VectorXd& beta, double lambda,
                                  const Eigen::VectorXd& y, const Eigen::MatrixXd& x,
                                  const SpatialOperator& op) {
  if (x.rows() != y.size() || x.cols() != beta.size() || op.size() != y.size()) {
    fail(ErrorCode::dimension_mismatch, "inputs to local_predictions disagree in size");
  }
  const Eigen::VectorXd trend = x * beta;
  return trend + lambda * (op.weights() * (y - trend));
}

Eigen::VectorXd local_predictions(const FitArtifact& fit, const Eigen::VectorXd& y,
                                  const Eigen::MatrixXd& x, const SpatialOperator& op) {
  return local_predictions(fit.beta, fit.lambda, y, x, op);
}

Eigen::VectorXd standardized_residuals(const Eigen::VectorXd& residuals, double sigma,
                                       const ErrorScale& scale) {
  if (!(sigma > 0.0)) fail(ErrorCode::non_positive_sigma, "sigma = " + std::to_string(sigma));
  if (residuals.size() != scale.size()) {
    fail(ErrorCode::dimension_mismatch, "residuals and Sigma_eps differ in length");
  }
  return residuals.array() / (sigma * scale.diag.array().sqrt());
}

CoefficientTests coefficient_tests(const Eigen::VectorXd& beta, double sigma, double lambda,
                                   double variance_factor, const GlsSystem& system) {
  const Eigen::MatrixXd cov = system.inverse_information(lambda);
  CoefficientTests out;
  out.se = (variance_factor * sigma * sigma * cov.diagonal().array()).sqrt();
  out.z = beta.array() / out.se.array();
  out.p.resize(beta.size());
  for (Eigen::Index i = 0; i < beta.size(); ++i) {
    out.p[i] = beta[i] == 0.0 ? 1.0 : two_sided_normal_p(out.z[i]);
  }
  return out;
}

CoefficientTests beta_inference(const FitArtifact& fit, const Eigen::MatrixXd& x,
                                const SpatialOperator& op, const ErrorScale& scale) {
  const GlsSystem system(Eigen::VectorXd::Zero(x.rows()), x, op, scale);
  double factor = 1.0;
  if (fit.family == ModelFamily::tsar) {
    const double nu = fit.nu.value_or(0.0);
    if (!(nu > 2.0)) fail(ErrorCode::domain_error, "tSAR inference needs nu > 2");
    factor = nu / (nu - 2.0);
  }
  return coefficient_tests(fit.beta, fit.sigma, fit.lambda, factor, system);
}

double s_hat(const FitArtifact& fit) {
  if (fit.family == ModelFamily::sar) return fit.sigma;
  const double nu = fit.nu.value_or(0.0);
  if (!(nu > 2.0)) fail(ErrorCode::domain_error, "s_hat needs nu > 2");
  return std::sqrt(nu / (nu - 2.0)) * fit.sigma;
}

namespace detail {

void complete_fit(FitArtifact& fit, const GlsSystem& system, const Eigen::VectorXd& y,
                  const Eigen::MatrixXd& x, const ErrorScale& scale) {
  fit.fitted = local_predictions(fit.beta, fit.lambda, y, x, system.op());
  fit.residuals = y - fit.fitted;
  fit.std_residuals = standardized_residuals(fit.residuals, fit.sigma, scale);
  double factor = 1.0;
  if (fit.family == ModelFamily::tsar) factor = *fit.nu / (*fit.nu - 2.0);
  auto tests = coefficient_tests(fit.beta, fit.sigma, fit.lambda, factor, system);
  fit.se_beta = std::move(tests.se);
  fit.z_scores = std::move(tests.z);
  fit.p_values = std::move(tests.p);
  fit.s_hat = s_hat(fit);
  const double edge = 10.0 * fit.lambda_tolerance;
  if (fit.lambda - kLambdaLower < edge || kLambdaUpper - fit.lambda < edge) {
    fit.warnings.emplace_back(kBoundaryWarning);
  }
}

}  // namespace detail

}  // namespace tsar
