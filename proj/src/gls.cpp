#include "tsar/gls.hpp"

#include <cmath>
#include <string>

#include "tsar/errors.hpp"

namespace tsar {

void check_lambda(double lambda) {
  if (!(lambda >= kLambdaLower && lambda <= kLambdaUpper)) {
    fail(ErrorCode::domain_error,
         "lambda = " + std::to_string(lambda) + " outside the admissible interval");
  }
}

void check_dimensions(const Eigen::VectorXd& y, const Eigen::MatrixXd& x,
                      const SpatialOperator& op, const ErrorScale& scale) {
  const auto n = y.size();
  if (x.rows() != n || op.size() != n || scale.size() != n) {
    fail(ErrorCode::dimension_mismatch,
         "n differs between y (" + std::to_string(n) + "), X (" + std::to_string(x.rows()) +
             "), W (" + std::to_string(op.size()) + ") and Sigma_eps (" +
             std::to_string(scale.size()) + ")");
  }
}

GlsSystem::GlsSystem(const Eigen::VectorXd& y, const Eigen::MatrixXd& x,
                     const SpatialOperator& op, const ErrorScale& scale)
    : y_(y), x_(x), op_(op) {
  check_dimensions(y, x, op, scale);
  wy_ = op.weights() * y;
  wx_ = op.weights() * x;
  inv_sqrt_scale_ = scale.diag.array().rsqrt();
  half_log_det_scale_ = 0.5 * scale.diag.array().log().sum();
}

Eigen::VectorXd GlsSystem::whiten(double lambda, const Eigen::VectorXd& u,
                                  const Eigen::VectorXd& wu) const {
  return inv_sqrt_scale_.cwiseProduct(u - lambda * wu);
}

Eigen::MatrixXd GlsSystem::whitened_design(double lambda) const {
  return inv_sqrt_scale_.asDiagonal() * (x_ - lambda * wx_);
}

GlsSolution GlsSystem::solve(double lambda) const {
  const Eigen::MatrixXd ax = whitened_design(lambda);
  const Eigen::VectorXd ay = whiten(lambda, y_, wy_);
  const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(ax);
  if (qr.rank() < ax.cols()) {
    fail(ErrorCode::singular_normal_equations,
         "X^T Sigma_Y^{-1} X is singular at lambda = " + std::to_string(lambda));
  }
  GlsSolution out;
  out.beta = qr.solve(ay);
  out.whitened_residual = ay - ax * out.beta;
  out.quadratic_form = out.whitened_residual.squaredNorm();
  return out;
}

Eigen::VectorXd GlsSystem::whitened_residual(double lambda, const Eigen::VectorXd& beta) const {
  if (beta.size() != p()) fail(ErrorCode::dimension_mismatch, "beta length differs from X columns");
  return whiten(lambda, y_ - x_ * beta, wy_ - wx_ * beta);
}

Eigen::MatrixXd GlsSystem::inverse_information(double lambda) const {
  const Eigen::MatrixXd ax = whitened_design(lambda);
  const Eigen::MatrixXd gram = ax.transpose() * ax;
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive() ||
      ldlt.vectorD().minCoeff() <= 0.0) {
    fail(ErrorCode::singular_normal_equations, "information matrix is not positive definite");
  }
  return ldlt.solve(Eigen::MatrixXd::Identity(p(), p()));
}

}  // namespace tsar
