#pragma once

// Heteroscedastic error-scale matrices built from neighbourhood-local
// variances of least-squares residuals.

#include <optional>
#include <span>

#include <Eigen/Dense>

#include "tsar/geo_proximity.hpp"

namespace tsar {

enum class ErrorScaleSource { identity, local_regression, user };

/// Diagonal of Sigma_eps. Every entry is positive and finite.
struct ErrorScale {
  Eigen::VectorXd diag;
  ErrorScaleSource source = ErrorScaleSource::user;

  static ErrorScale identity(Eigen::Index n);
  /// Validates positivity; source = user.
  static ErrorScale from_diagonal(Eigen::VectorXd diag,
                                  ErrorScaleSource source = ErrorScaleSource::user);

  Eigen::Index size() const { return diag.size(); }
};

struct OlsFit {
  Eigen::VectorXd beta;
  Eigen::VectorXd residuals;
};

/// Least squares of y on X. RankDeficientDesign if X lacks full column rank.
OlsFit ols_fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y);

struct LocalVarianceOptions {
  /// When set, local variances below the floor are raised to it instead of
  /// raising DegenerateVariance.
  std::optional<double> floor;
};

/// Sample variance (denominator |N| - 1) of z over the given indices.
double neighborhood_variance(const Eigen::VectorXd& z, std::span<const std::size_t> members);

/// diag_i = sample variance of {z_j : j in N_i}. Requires |N_i| >= 2.
ErrorScale local_empirical_variance(const Eigen::VectorXd& z, const ProximityMatrix& w,
                                    const LocalVarianceOptions& options = {});

/// Local empirical variance of the OLS residuals of y on X.
ErrorScale local_regression_variance_matrix(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                            const ProximityMatrix& w,
                                            const LocalVarianceOptions& options = {});

}  // namespace tsar
