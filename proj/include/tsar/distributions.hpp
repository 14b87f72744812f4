#pragma once

// Normal and Student-t distribution functions used for inference, intervals
// and likelihoods.

namespace tsar {

double normal_cdf(double x);

/// Inverse of normal_cdf on (0, 1); DomainError outside.
double normal_quantile(double p);

/// Two-sided p-value 2 * (1 - Phi(|z|)).
double two_sided_normal_p(double z);

/// Survival function of chi-square(1), via 2 * (1 - Phi(sqrt(x))).
double chi2_1_survival(double x);

/// log t(x | mu, scale, nu), where `scale` is the scale parameter (the
/// variance is nu / (nu - 2) * scale).
double t_log_density(double x, double mu, double scale, double nu);
double t_density(double x, double mu, double scale, double nu);

/// Standardized t (mu = 0, scale = 1).
double t_cdf(double x, double nu);
double t_quantile(double p, double nu);

}  // namespace tsar
