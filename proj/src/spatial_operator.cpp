#include "tsar/spatial_operator.hpp"

#include <cmath>
#include <string>

#include <lapacke.h>

#include "tsar/errors.hpp"

namespace tsar {

SpatialOperator::SpatialOperator(const ProximityMatrix& w, LogDetMethod method)
    : w_(w.to_sparse()) {
  init(method);
}

SpatialOperator::SpatialOperator(Eigen::SparseMatrix<double, Eigen::RowMajor> w,
                                 LogDetMethod method)
    : w_(std::move(w)) {
  init(method);
}

SpatialOperator::SpatialOperator(const Eigen::MatrixXd& w, LogDetMethod method)
    : w_(w.sparseView()) {
  init(method);
}

void SpatialOperator::init(LogDetMethod method) {
  if (w_.rows() != w_.cols()) fail(ErrorCode::dimension_mismatch, "W must be square");
  w_.makeCompressed();
  if (method == LogDetMethod::automatic) {
    method = size() <= kEigenLogDetThreshold ? LogDetMethod::lu : LogDetMethod::eigenvalues;
  }
  method_ = method;
  if (method_ == LogDetMethod::eigenvalues) {
    spectrum_ = eigenvalues(Eigen::MatrixXd(w_));
  }
}

Eigen::VectorXd SpatialOperator::apply(double lambda, const Eigen::VectorXd& u) const {
  if (u.size() != size()) fail(ErrorCode::dimension_mismatch, "vector length differs from n");
  return u - lambda * (w_ * u);
}

Eigen::MatrixXd SpatialOperator::apply(double lambda, const Eigen::MatrixXd& u) const {
  if (u.rows() != size()) fail(ErrorCode::dimension_mismatch, "matrix rows differ from n");
  return u - lambda * (w_ * u);
}

Eigen::VectorXd SpatialOperator::solve(double lambda, const Eigen::VectorXd& rhs) const {
  if (rhs.size() != size()) fail(ErrorCode::dimension_mismatch, "vector length differs from n");
  Eigen::MatrixXd a = -lambda * Eigen::MatrixXd(w_);
  a.diagonal().array() += 1.0;
  return Eigen::PartialPivLU<Eigen::MatrixXd>(a).solve(rhs);
}

double SpatialOperator::log_abs_det_lu(double lambda) const {
  Eigen::MatrixXd a = -lambda * Eigen::MatrixXd(w_);
  a.diagonal().array() += 1.0;
  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(a);
  return lu.matrixLU().diagonal().array().abs().log().sum();
}

double SpatialOperator::log_abs_det(double lambda) const {
  if (method_ != LogDetMethod::eigenvalues) return log_abs_det_lu(lambda);
  double sum = 0.0;
  for (const auto& mu : spectrum_) {
    const double re = 1.0 - lambda * mu.real();
    const double im = lambda * mu.imag();
    sum += 0.5 * std::log(re * re + im * im);
  }
  return sum;
}

std::vector<std::complex<double>> eigenvalues(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols()) fail(ErrorCode::dimension_mismatch, "matrix must be square");
  const auto n = static_cast<lapack_int>(m.rows());
  if (n == 0) return {};
  Eigen::MatrixXd a = m;  // column-major copy, overwritten by dgeev
  std::vector<double> wr(static_cast<std::size_t>(n));
  std::vector<double> wi(static_cast<std::size_t>(n));
  double dummy = 0.0;
  const lapack_int info = LAPACKE_dgeev(LAPACK_COL_MAJOR, 'N', 'N', n, a.data(), n, wr.data(),
                                        wi.data(), &dummy, 1, &dummy, 1);
  if (info != 0) {
    fail(ErrorCode::optimizer_failure, "eigenvalue computation failed (info " +
                                           std::to_string(info) + ")");
  }
  std::vector<std::complex<double>> out(static_cast<std::size_t>(n));
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = {wr[i], wi[i]};
  return out;
}

}  // namespace tsar
