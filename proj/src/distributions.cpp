#include "tsar/distributions.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/erf.hpp>

#include "tsar/errors.hpp"

namespace tsar {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;

void check_probability(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    fail(ErrorCode::domain_error, "probability " + std::to_string(p) + " outside (0, 1)");
  }
}

void check_nu(double nu) {
  if (!(nu > 0.0) || std::isnan(nu)) {
    fail(ErrorCode::domain_error, "degrees of freedom must be positive");
  }
}

double normal_pdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

}  // namespace

double normal_cdf(double x) { return 0.5 * std::erfc(-x * kInvSqrt2); }

double normal_quantile(double p) {
  check_probability(p);
  if (p == 0.5) return 0.0;
  double x = -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p);
  // Newton polish against normal_cdf
  const double pdf = normal_pdf(x);
  if (pdf > 0.0) x -= (normal_cdf(x) - p) / pdf;
  return x;
}

double two_sided_normal_p(double z) {
  if (std::isnan(z)) return z;
  return std::erfc(std::abs(z) * kInvSqrt2);
}

double chi2_1_survival(double x) {
  if (!(x >= 0.0)) {
    fail(ErrorCode::domain_error, "chi-square statistic must be nonnegative");
  }
  return two_sided_normal_p(std::sqrt(x));
}

double t_log_density(double x, double mu, double scale, double nu) {
  check_nu(nu);
  if (!(scale > 0.0)) fail(ErrorCode::domain_error, "t scale parameter must be positive");
  const double d = x - mu;
  return std::lgamma(0.5 * (nu + 1.0)) - std::lgamma(0.5 * nu) -
         0.5 * std::log(nu * std::numbers::pi * scale) -
         0.5 * (nu + 1.0) * std::log1p(d * d / (nu * scale));
}

double t_density(double x, double mu, double scale, double nu) {
  return std::exp(t_log_density(x, mu, scale, nu));
}

double t_cdf(double x, double nu) {
  check_nu(nu);
  if (std::isnan(x)) return x;
  if (std::isinf(x)) return x > 0 ? 1.0 : 0.0;
  const double x2 = x * x;
  // lower tail mass P(T < -|x|) through the regularized incomplete beta
  double tail;
  if (nu < 2.0 * x2) {
    tail = 0.5 * boost::math::ibeta(0.5 * nu, 0.5, nu / (nu + x2));
  } else {
    tail = 0.5 * boost::math::ibetac(0.5, 0.5 * nu, x2 / (nu + x2));
  }
  return x < 0.0 ? tail : 1.0 - tail;
}

double t_quantile(double p, double nu) {
  check_probability(p);
  check_nu(nu);
  if (p == 0.5) return 0.0;
  if (p < 0.5) return -t_quantile(1.0 - p, nu);

  // p > 0.5: quantile is positive; bracket then bisect
  double lo = 0.0;
  double hi = 1.0;
  while (t_cdf(hi, nu) < p) {
    lo = hi;
    hi *= 2.0;
    if (!std::isfinite(hi)) fail(ErrorCode::domain_error, "t quantile not bracketed");
  }
  while (hi - lo > 1e-10 * std::max(1.0, hi)) {
    const double mid = 0.5 * (lo + hi);
    if (t_cdf(mid, nu) < p) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  double x = 0.5 * (lo + hi);
  for (int it = 0; it < 2; ++it) {
    const double dens = t_density(x, 0.0, 1.0, nu);
    if (!(dens > 0.0)) break;
    const double step = (t_cdf(x, nu) - p) / dens;
    if (!std::isfinite(step) || std::abs(step) > hi - lo + 1e-12) break;
    x -= step;
  }
  return x;
}

}  // namespace tsar
