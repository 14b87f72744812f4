#include "tsar/optimize.hpp"

#include <cfloat>
#include <cmath>

#include "tsar/errors.hpp"

namespace tsar {

BrentResult brent_minimize(const std::function<double(double)>& f, double lower, double upper,
                           const BrentOptions& options) {
  if (!(lower < upper)) fail(ErrorCode::domain_error, "empty search interval");
  if (!(options.tolerance > 0.0)) fail(ErrorCode::domain_error, "tolerance must be positive");

  const double c = (3.0 - std::sqrt(5.0)) * 0.5;
  const double eps = std::sqrt(DBL_EPSILON);
  const double tol3 = options.tolerance / 3.0;

  BrentResult res;
  bool any_finite = false;
  auto eval = [&](double x) {
    ++res.evaluations;
    double v = f(x);
    if (std::isfinite(v)) {
      any_finite = true;
    } else {
      v = DBL_MAX;
    }
    return v;
  };

  double a = lower;
  double b = upper;
  double v = a + c * (b - a);
  double w = v;
  double x = v;
  double d = 0.0;
  double e = 0.0;
  double fx = eval(x);
  double fv = fx;
  double fw = fx;

  for (;;) {
    const double xm = (a + b) * 0.5;
    const double tol1 = eps * std::abs(x) + tol3;
    const double t2 = tol1 * 2.0;
    if (std::abs(x - xm) <= t2 - (b - a) * 0.5) {
      res.converged = true;
      break;
    }
    if (res.iterations >= options.max_iterations) break;
    ++res.iterations;

    double p = 0.0;
    double q = 0.0;
    double r = 0.0;
    if (std::abs(e) > tol1) {
      r = (x - w) * (fx - fv);
      q = (x - v) * (fx - fw);
      p = (x - v) * q - (x - w) * r;
      q = (q - r) * 2.0;
      if (q > 0.0) {
        p = -p;
      } else {
        q = -q;
      }
      r = e;
      e = d;
    }

    double u;
    if (std::abs(p) >= std::abs(q * 0.5 * r) || p <= q * (a - x) || p >= q * (b - x)) {
      e = (x < xm) ? b - x : a - x;
      d = c * e;
    } else {
      d = p / q;
      u = x + d;
      // keep away from the interval ends
      if (u - a < t2 || b - u < t2) {
        d = tol1;
        if (x >= xm) d = -d;
      }
    }

    if (std::abs(d) >= tol1) {
      u = x + d;
    } else if (d > 0.0) {
      u = x + tol1;
    } else {
      u = x - tol1;
    }

    const double fu = eval(u);
    if (fu <= fx) {
      if (u < x) {
        b = x;
      } else {
        a = x;
      }
      v = w;
      fv = fw;
      w = x;
      fw = fx;
      x = u;
      fx = fu;
    } else {
      if (u < x) {
        a = u;
      } else {
        b = u;
      }
      if (fu <= fw || w == x) {
        v = w;
        fv = fw;
        w = u;
        fw = fu;
      } else if (fu <= fv || v == x || v == w) {
        v = u;
        fv = fu;
      }
    }
  }

  if (!any_finite) fail(ErrorCode::optimizer_failure, "no finite objective evaluation");
  res.x = x;
  res.value = fx;
  return res;
}

}  // namespace tsar
