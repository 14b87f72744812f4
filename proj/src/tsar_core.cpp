#include "tsar/tsar_core.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "tsar/distributions.hpp"
#include "tsar/errors.hpp"

namespace tsar {

namespace {

void check_nu(double nu) {
  if (!(nu > 2.0) || !std::isfinite(nu)) {
    fail(ErrorCode::domain_error, "nu = " + std::to_string(nu) + " must exceed 2");
  }
}

void check_sigma(double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    fail(ErrorCode::non_positive_sigma, "sigma = " + std::to_string(sigma));
  }
}

// -sum_i log t(z_i | 0, sigma2, nu)
double t_kernel_nll(const Eigen::VectorXd& z, double sigma2, double nu) {
  const double n = static_cast<double>(z.size());
  const double log_norm = std::lgamma(0.5 * (nu + 1.0)) - std::lgamma(0.5 * nu) -
                          0.5 * std::log(nu * std::numbers::pi * sigma2);
  double kernel = 0.0;
  for (Eigen::Index i = 0; i < z.size(); ++i) kernel += std::log1p(z[i] * z[i] / (nu * sigma2));
  return -n * log_norm + 0.5 * (nu + 1.0) * kernel;
}

}  // namespace

double tsar_nll(const Eigen::VectorXd& y, const Eigen::MatrixXd& x, const Eigen::VectorXd& beta,
                double lambda, double sigma, double nu, const SpatialOperator& op,
                const ErrorScale& scale) {
  check_lambda(lambda);
  check_sigma(sigma);
  check_nu(nu);
  check_dimensions(y, x, op, scale);
  if (beta.size() != x.cols()) fail(ErrorCode::dimension_mismatch, "beta length differs from X");
  const Eigen::VectorXd z =
      op.apply(lambda, Eigen::VectorXd(y - x * beta)).cwiseProduct(scale.diag.cwiseSqrt().cwiseInverse());
  const double log_abs_det = op.log_abs_det(lambda) - 0.5 * scale.diag.array().log().sum();
  return -log_abs_det + t_kernel_nll(z, sigma * sigma, nu);
}

Eigen::VectorXd tsar_beta_gradient(const Eigen::VectorXd& y, const Eigen::MatrixXd& x,
                                   const Eigen::VectorXd& beta, double lambda, double sigma,
                                   double nu, const SpatialOperator& op, const ErrorScale& scale) {
  check_lambda(lambda);
  check_sigma(sigma);
  check_nu(nu);
  const GlsSystem system(y, x, op, scale);
  const Eigen::VectorXd m = system.whitened_residual(lambda, beta);
  const Eigen::MatrixXd ax = system.whitened_design(lambda);
  const double s2nu = sigma * sigma * nu;
  const Eigen::VectorXd weight = m.array() / (s2nu + m.array().square());
  return -(nu + 1.0) * (ax.transpose() * weight);
}

double tsar_sigma2(const Eigen::VectorXd& y, const Eigen::MatrixXd& x, const Eigen::VectorXd& beta,
                   double lambda, double nu, const SpatialOperator& op, const ErrorScale& scale) {
  check_nu(nu);
  return (nu - 2.0) / nu * sar_sigma2(y, x, beta, lambda, op, scale);
}

double tsar_sigma2_from_residuals(const Eigen::VectorXd& residuals, double nu,
                                  const ErrorScale& scale) {
  check_nu(nu);
  if (residuals.size() != scale.size()) {
    fail(ErrorCode::dimension_mismatch, "residuals and Sigma_eps differ in length");
  }
  const double mean_sq =
      (residuals.array().square() / scale.diag.array()).sum() / static_cast<double>(residuals.size());
  return (nu - 2.0) / nu * mean_sq;
}

double tsar_profile_nll(double lambda, double nu, const GlsSystem& system) {
  check_lambda(lambda);
  check_nu(nu);
  const auto sol = system.solve(lambda);
  const double sigma2 = (nu - 2.0) / nu * sol.quadratic_form / static_cast<double>(system.n());
  if (!(sigma2 > 0.0)) return std::numeric_limits<double>::infinity();
  const double log_abs_det = system.op().log_abs_det(lambda) - system.half_log_det_scale();
  return -log_abs_det + t_kernel_nll(sol.whitened_residual, sigma2, nu);
}

TsarProfileOptimum tsar_optimize_lambda(double nu, const GlsSystem& system,
                                        const BrentOptions& options) {
  const auto best = brent_minimize(
      [&](double lambda) { return tsar_profile_nll(lambda, nu, system); }, kLambdaLower,
      kLambdaUpper, options);
  return {best.x, best.value, best.converged};
}

FitArtifact fit_tsar(const Eigen::VectorXd& y, const Eigen::MatrixXd& x, const SpatialOperator& op,
                     const ErrorScale& scale, const TsarFitOptions& options) {
  const GlsSystem system(y, x, op, scale);
  const auto& spec = options.nu;

  double nu;
  TsarProfileOptimum inner;
  bool outer_converged = true;
  if (spec.fixed) {
    nu = *spec.fixed;
    check_nu(nu);
    inner = tsar_optimize_lambda(nu, system, options.lambda_search);
  } else {
    if (!(spec.lower > 2.0) || !(spec.upper > spec.lower)) {
      fail(ErrorCode::domain_error, "nu search interval must lie above 2");
    }
    const auto outer = brent_minimize(
        [&](double candidate) {
          return tsar_optimize_lambda(candidate, system, options.lambda_search).nll;
        },
        spec.lower, spec.upper, BrentOptions{spec.tolerance, 200});
    nu = outer.x;
    outer_converged = outer.converged;
    inner = tsar_optimize_lambda(nu, system, options.lambda_search);
  }

  FitArtifact fit;
  fit.family = ModelFamily::tsar;
  fit.nu = nu;
  fit.nu_estimated = !spec.fixed.has_value();
  if (fit.nu_estimated) fit.nu_tolerance = spec.tolerance;
  fit.lambda = inner.lambda;
  fit.lambda_tolerance = options.lambda_search.tolerance;
  const auto sol = system.solve(fit.lambda);
  fit.beta = sol.beta;
  const double sigma2 = (nu - 2.0) / nu * sol.quadratic_form / static_cast<double>(system.n());
  if (!(sigma2 > 0.0)) {
    fail(ErrorCode::optimizer_failure, "estimated sigma is zero (response fitted exactly)");
  }
  fit.sigma = std::sqrt(sigma2);
  fit.loglik = -inner.nll;
  if (!inner.converged) fit.warnings.emplace_back("lambda search hit the iteration limit");
  if (!outer_converged) fit.warnings.emplace_back("nu search hit the iteration limit");
  detail::complete_fit(fit, system, y, x, scale);
  return fit;
}

CoefficientTests tsar_beta_inference(const FitArtifact& fit, const Eigen::MatrixXd& x,
                                     const SpatialOperator& op, const ErrorScale& scale) {
  const double nu = fit.nu.value_or(0.0);
  check_nu(nu);
  const GlsSystem system(Eigen::VectorXd::Zero(x.rows()), x, op, scale);
  return coefficient_tests(fit.beta, fit.sigma, fit.lambda, nu / (nu - 2.0), system);
}

}  // namespace tsar
