#pragma once

#include <complex>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "tsar/geo_proximity.hpp"

namespace tsar {

enum class LogDetMethod {
  automatic,    // lu up to kEigenLogDetThreshold locations, eigenvalues above
  lu,           // dense LU of (I - lambda W) on every call
  eigenvalues,  // spectrum of W computed once; O(n) per call
};

inline constexpr Eigen::Index kEigenLogDetThreshold = 400;

/// The spatial filter A(lambda) = I - lambda W for a fixed proximity matrix,
/// together with log|det A(lambda)|. Immutable after construction; safe for
/// concurrent use.
class SpatialOperator {
 public:
  explicit SpatialOperator(const ProximityMatrix& w, LogDetMethod method = LogDetMethod::automatic);
  explicit SpatialOperator(Eigen::SparseMatrix<double, Eigen::RowMajor> w,
                           LogDetMethod method = LogDetMethod::automatic);
  explicit SpatialOperator(const Eigen::MatrixXd& w, LogDetMethod method = LogDetMethod::automatic);

  Eigen::Index size() const { return w_.rows(); }
  const Eigen::SparseMatrix<double, Eigen::RowMajor>& weights() const { return w_; }
  LogDetMethod method() const { return method_; }

  /// (I - lambda W) u
  Eigen::VectorXd apply(double lambda, const Eigen::VectorXd& u) const;
  Eigen::MatrixXd apply(double lambda, const Eigen::MatrixXd& u) const;

  /// (I - lambda W)^{-1} rhs by dense LU.
  Eigen::VectorXd solve(double lambda, const Eigen::VectorXd& rhs) const;

  /// log |det(I - lambda W)|
  double log_abs_det(double lambda) const;
  double log_abs_det_lu(double lambda) const;

 private:
  void init(LogDetMethod method);

  Eigen::SparseMatrix<double, Eigen::RowMajor> w_;
  LogDetMethod method_;
  std::vector<std::complex<double>> spectrum_;
};

/// A proximity matrix together with its operator. Neighbourhood queries use
/// `matrix`; likelihood code uses `op`.
struct SpatialWeights {
  explicit SpatialWeights(ProximityMatrix w, LogDetMethod method = LogDetMethod::automatic)
      : matrix(std::move(w)), op(matrix, method) {}

  ProximityMatrix matrix;
  SpatialOperator op;
};

/// Spectrum of a dense square matrix (LAPACK dgeev, eigenvalues only).
std::vector<std::complex<double>> eigenvalues(const Eigen::MatrixXd& m);

}  // namespace tsar
