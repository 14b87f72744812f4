#pragma once

// Whitened generalized least squares for the SAR family. With
// A(lambda) = Sigma_eps^{-1/2} (I - lambda W) we have
// Sigma_Y(lambda)^{-1} = A^T A, so every quadratic form and the GLS
// estimator reduce to ordinary least squares on (A X, A y). Sigma_Y is never
// formed.

#include <Eigen/Dense>

#include "tsar/spatial_operator.hpp"
#include "tsar/variance_local.hpp"

namespace tsar {

inline constexpr double kLambdaMargin = 1e-6;
inline constexpr double kLambdaLower = -1.0 + kLambdaMargin;
inline constexpr double kLambdaUpper = 1.0 - kLambdaMargin;

/// DomainError unless lambda lies in [kLambdaLower, kLambdaUpper].
void check_lambda(double lambda);

/// Checks that y, X, W and Sigma_eps agree on n.
void check_dimensions(const Eigen::VectorXd& y, const Eigen::MatrixXd& x,
                      const SpatialOperator& op, const ErrorScale& scale);

struct GlsSolution {
  Eigen::VectorXd beta;
  Eigen::VectorXd whitened_residual;  // A (y - X beta)
  double quadratic_form = 0.0;        // (y - X beta)^T Sigma_Y^{-1} (y - X beta)
};

/// Precomputes W y, W X and Sigma_eps^{-1/2} so that each lambda costs
/// O(n p^2) plus the log-determinant. Holds a reference to `op`, which must
/// outlive the system.
class GlsSystem {
 public:
  GlsSystem(const Eigen::VectorXd& y, const Eigen::MatrixXd& x, const SpatialOperator& op,
            const ErrorScale& scale);

  Eigen::Index n() const { return y_.size(); }
  Eigen::Index p() const { return x_.cols(); }

  Eigen::VectorXd whiten(double lambda, const Eigen::VectorXd& u, const Eigen::VectorXd& wu) const;
  Eigen::MatrixXd whitened_design(double lambda) const;

  /// beta_hat(lambda). SingularNormalEquations if A X is rank deficient.
  GlsSolution solve(double lambda) const;

  /// A (y - X beta) for a given beta.
  Eigen::VectorXd whitened_residual(double lambda, const Eigen::VectorXd& beta) const;

  /// (X^T Sigma_Y(lambda)^{-1} X)^{-1}
  Eigen::MatrixXd inverse_information(double lambda) const;

  /// 0.5 * sum log (Sigma_eps)_ii
  double half_log_det_scale() const { return half_log_det_scale_; }
  const SpatialOperator& op() const { return op_; }

 private:
  Eigen::VectorXd y_;
  Eigen::MatrixXd x_;
  const SpatialOperator& op_;
  Eigen::VectorXd wy_;
  Eigen::MatrixXd wx_;
  Eigen::VectorXd inv_sqrt_scale_;
  double half_log_det_scale_ = 0.0;
};

}  // namespace tsar
