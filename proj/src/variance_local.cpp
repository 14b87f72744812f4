#include "tsar/variance_local.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "tsar/errors.hpp"

namespace tsar {

ErrorScale ErrorScale::identity(Eigen::Index n) {
  return {Eigen::VectorXd::Ones(n), ErrorScaleSource::identity};
}

ErrorScale ErrorScale::from_diagonal(Eigen::VectorXd diag, ErrorScaleSource source) {
  for (Eigen::Index i = 0; i < diag.size(); ++i) {
    if (!std::isfinite(diag[i]) || diag[i] <= 0.0) {
      fail(ErrorCode::domain_error,
           "error scale entry " + std::to_string(i) + " must be positive and finite");
    }
  }
  return {std::move(diag), source};
}

OlsFit ols_fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  if (x.rows() != y.size()) {
    fail(ErrorCode::dimension_mismatch, "design has " + std::to_string(x.rows()) +
                                            " rows but response has " + std::to_string(y.size()));
  }
  const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
  if (qr.rank() < x.cols()) {
    fail(ErrorCode::rank_deficient_design, "design rank " + std::to_string(qr.rank()) + " < " +
                                               std::to_string(x.cols()) + " columns");
  }
  OlsFit fit;
  fit.beta = qr.solve(y);
  fit.residuals = y - x * fit.beta;
  return fit;
}

double neighborhood_variance(const Eigen::VectorXd& z, std::span<const std::size_t> members) {
  const auto m = members.size();
  if (m < 2) {
    fail(ErrorCode::neighborhood_too_small, "neighbourhood of size " + std::to_string(m));
  }
  double mean = 0.0;
  for (auto j : members) mean += z[static_cast<Eigen::Index>(j)];
  mean /= static_cast<double>(m);
  double ss = 0.0;
  for (auto j : members) {
    const double d = z[static_cast<Eigen::Index>(j)] - mean;
    ss += d * d;
  }
  return ss / static_cast<double>(m - 1);
}

namespace {

// Variances at or below (kDegenerateRelTol * reference)^2 count as zero;
// residuals of an exact fit are rounding noise, not spread.
constexpr double kDegenerateRelTol = 1e-12;

ErrorScale local_variance_impl(const Eigen::VectorXd& z, const ProximityMatrix& w,
                               const LocalVarianceOptions& options, double reference) {
  const auto n = static_cast<Eigen::Index>(w.size());
  if (z.size() != n) fail(ErrorCode::dimension_mismatch, "values and W differ in size");
  if (options.floor && !(*options.floor > 0.0)) {
    fail(ErrorCode::domain_error, "variance floor must be positive");
  }
  const double threshold = (kDegenerateRelTol * reference) * (kDegenerateRelTol * reference);
  Eigen::VectorXd diag(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto members = neighbors(w, static_cast<std::size_t>(i));
    if (members.size() < 2) {
      fail(ErrorCode::neighborhood_too_small,
           "location " + std::to_string(i) + " has " + std::to_string(members.size()) +
               " neighbours");
    }
    double v = neighborhood_variance(z, members);
    if (options.floor) {
      v = std::max(v, *options.floor);
    } else if (!(v > threshold)) {
      fail(ErrorCode::degenerate_variance, "zero local variance at location " + std::to_string(i));
    }
    diag[i] = v;
  }
  return {std::move(diag), ErrorScaleSource::local_regression};
}

}  // namespace

ErrorScale local_empirical_variance(const Eigen::VectorXd& z, const ProximityMatrix& w,
                                    const LocalVarianceOptions& options) {
  const double reference = z.size() > 0 ? z.cwiseAbs().maxCoeff() : 0.0;
  return local_variance_impl(z, w, options, reference);
}

ErrorScale local_regression_variance_matrix(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                            const ProximityMatrix& w,
                                            const LocalVarianceOptions& options) {
  const auto ols = ols_fit(x, y);
  const double reference = y.size() > 0 ? y.cwiseAbs().maxCoeff() : 0.0;
  auto scale = local_variance_impl(ols.residuals, w, options, reference);
  scale.source = ErrorScaleSource::local_regression;
  return scale;
}

}  // namespace tsar
