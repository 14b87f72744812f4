#pragma once

// Gaussian simultaneous autoregressive model
//
//   y = X beta + lambda W (y - X beta) + eps,   eps ~ N(0, sigma^2 Sigma_eps)
//
// fitted by profile maximum likelihood over lambda with beta and sigma^2
// replaced by their closed-form lambda-dependent estimators.

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tsar/gls.hpp"
#include "tsar/optimize.hpp"
#include "tsar/spatial_operator.hpp"
#include "tsar/variance_local.hpp"

namespace tsar {

enum class ModelFamily { sar, tsar };

std::string_view family_name(ModelFamily family);

/// Coefficient tests treat lambda as known, so the standard errors are
/// optimistic.
inline constexpr std::string_view kInferenceCaveat =
    "standard errors treat lambda as known and are therefore too small";

inline constexpr std::string_view kBoundaryWarning = "lambda estimate at search boundary";

/// Fitted SAR or tSAR model. `nu` is set only for tSAR.
struct FitArtifact {
  ModelFamily family = ModelFamily::sar;
  Eigen::VectorXd beta;
  double lambda = 0.0;
  double sigma = 0.0;
  std::optional<double> nu;
  bool nu_estimated = false;
  double s_hat = 0.0;
  double loglik = 0.0;
  Eigen::VectorXd fitted;
  Eigen::VectorXd residuals;
  Eigen::VectorXd std_residuals;
  Eigen::VectorXd se_beta;
  Eigen::VectorXd z_scores;
  Eigen::VectorXd p_values;
  double lambda_tolerance = 1e-6;
  std::optional<double> nu_tolerance;
  std::vector<std::string> warnings;

  /// Free parameters: coefficients, sigma, lambda, plus nu when estimated.
  int parameter_count() const;
};

struct SarFitOptions {
  BrentOptions lambda_search{1e-6, 200};
  /// Skips the lambda search and fits at this value.
  std::optional<double> fixed_lambda;
};

/// u^T Sigma_Y(lambda)^{-1} u = v^T Sigma_eps^{-1} v with v = (I - lambda W) u.
double sigma_y_inv_form(const Eigen::VectorXd& u, double lambda, const SpatialOperator& op,
                        const ErrorScale& scale);

/// Generalized least squares estimator beta_hat(lambda).
Eigen::VectorXd gls_beta(const Eigen::VectorXd& y, const Eigen::MatrixXd& x, double lambda,
                         const SpatialOperator& op, const ErrorScale& scale);

/// (1/n) (y - X beta)^T Sigma_Y(lambda)^{-1} (y - X beta)
double sar_sigma2(const Eigen::VectorXd& y, const Eigen::MatrixXd& x, const Eigen::VectorXd& beta,
                  double lambda, const SpatialOperator& op, const ErrorScale& scale);

/// Negative log-likelihood of the Gaussian SAR model.
double sar_nll(const Eigen::VectorXd& y, const Eigen::MatrixXd& x, const Eigen::VectorXd& beta,
               double sigma, double lambda, const SpatialOperator& op, const ErrorScale& scale);

/// sar_nll at beta_hat(lambda) and sigma_hat(beta_hat(lambda), lambda).
double sar_profile_nll(double lambda, const GlsSystem& system);
double sar_profile_nll(double lambda, const Eigen::VectorXd& y, const Eigen::MatrixXd& x,
                       const SpatialOperator& op, const ErrorScale& scale);

FitArtifact fit_sar(const Eigen::VectorXd& y, const Eigen::MatrixXd& x, const SpatialOperator& op,
                    const ErrorScale& scale, const SarFitOptions& options = {});

/// X beta + lambda W (y - X beta)
Eigen::VectorXd local_predictions(const Eigen::VectorXd& beta, double lambda,
                                  const Eigen::VectorXd& y, const Eigen::MatrixXd& x,
                                  const SpatialOperator& op);
Eigen::VectorXd local_predictions(const FitArtifact& fit, const Eigen::VectorXd& y,
                                  const Eigen::MatrixXd& x, const SpatialOperator& op);

/// eps_hat_i / sqrt(sigma^2 (Sigma_eps)_ii)
Eigen::VectorXd standardized_residuals(const Eigen::VectorXd& residuals, double sigma,
                                       const ErrorScale& scale);

struct CoefficientTests {
  Eigen::VectorXd se;
  Eigen::VectorXd z;
  Eigen::VectorXd p;
};

/// se_i = sqrt(variance_factor * sigma^2 * ((X^T Sigma_Y^{-1} X)^{-1})_ii)
/// with z = beta / se and two-sided normal p-values. variance_factor is 1
/// for SAR and nu / (nu - 2) for tSAR.
CoefficientTests coefficient_tests(const Eigen::VectorXd& beta, double sigma, double lambda,
                                   double variance_factor, const GlsSystem& system);

CoefficientTests beta_inference(const FitArtifact& fit, const Eigen::MatrixXd& x,
                                const SpatialOperator& op, const ErrorScale& scale);

namespace detail {

/// Fills fitted values, residuals, standardized residuals, coefficient tests
/// and the boundary warning from beta, lambda, sigma (and nu).
void complete_fit(FitArtifact& fit, const GlsSystem& system, const Eigen::VectorXd& y,
                  const Eigen::MatrixXd& x, const ErrorScale& scale);

}  // namespace detail

/// s_hat: sigma for SAR, sqrt(nu / (nu - 2)) sigma for tSAR.
double s_hat(const FitArtifact& fit);

}  // namespace tsar
