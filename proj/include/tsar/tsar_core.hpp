#pragma once

// SAR structure with independent Student-t errors
//   eps_i ~ t(0, sigma^2 (Sigma_eps)_ii, nu),   nu > 2.
//
// beta is estimated by GLS and sigma^2 by the moment-corrected estimator
// (nu - 2)/nu * (1/n) (y - X beta)^T Sigma_Y^{-1} (y - X beta); lambda by
// minimizing the resulting profile likelihood and, optionally, nu by an
// outer one-dimensional search around the lambda profile.

#include <optional>

#include <Eigen/Dense>

#include "tsar/sar_core.hpp"

namespace tsar {

struct NuSpec {
  std::optional<double> fixed;  // use this nu as given
  double lower = 3.0;
  double upper = 20.0;
  double tolerance = 1.0;

  static NuSpec fixed_at(double nu) { return {nu}; }
  static NuSpec estimate(double lower = 3.0, double upper = 20.0, double tolerance = 1.0) {
    return {std::nullopt, lower, upper, tolerance};
  }
};

struct TsarFitOptions {
  BrentOptions lambda_search{1e-6, 200};
  NuSpec nu = NuSpec::estimate();
};

double tsar_nll(const Eigen::VectorXd& y, const Eigen::MatrixXd& x, const Eigen::VectorXd& beta,
                double lambda, double sigma, double nu, const SpatialOperator& op,
                const ErrorScale& scale);

/// Gradient of tsar_nll with respect to beta. The log-determinant term does
/// not depend on beta, so only the sum over the t kernels contributes:
///   -(nu + 1) sum_i m_i / (nu sigma^2 + m_i^2) * (A X)_i
/// with m = A (y - X beta) and A = Sigma_eps^{-1/2} (I - lambda W).
Eigen::VectorXd tsar_beta_gradient(const Eigen::VectorXd& y, const Eigen::MatrixXd& x,
                                   const Eigen::VectorXd& beta, double lambda, double sigma,
                                   double nu, const SpatialOperator& op, const ErrorScale& scale);

/// (nu - 2)/nu times sar_sigma2.
double tsar_sigma2(const Eigen::VectorXd& y, const Eigen::MatrixXd& x, const Eigen::VectorXd& beta,
                   double lambda, double nu, const SpatialOperator& op, const ErrorScale& scale);

/// Residual form ((nu - 2)/nu) (1/n) sum_i eps_hat_i^2 / (Sigma_eps)_ii.
double tsar_sigma2_from_residuals(const Eigen::VectorXd& residuals, double nu,
                                  const ErrorScale& scale);

double tsar_profile_nll(double lambda, double nu, const GlsSystem& system);

struct TsarProfileOptimum {
  double lambda = 0.0;
  double nll = 0.0;
  bool converged = false;
};

/// Inner search: lambda minimizing the profile at fixed nu.
TsarProfileOptimum tsar_optimize_lambda(double nu, const GlsSystem& system,
                                        const BrentOptions& options = {});

FitArtifact fit_tsar(const Eigen::VectorXd& y, const Eigen::MatrixXd& x, const SpatialOperator& op,
                     const ErrorScale& scale, const TsarFitOptions& options = {});

/// se_i = sqrt(nu/(nu - 2) sigma^2 ((X^T Sigma_Y^{-1} X)^{-1})_ii).
CoefficientTests tsar_beta_inference(const FitArtifact& fit, const Eigen::MatrixXd& x,
                                     const SpatialOperator& op, const ErrorScale& scale);

}  // namespace tsar
