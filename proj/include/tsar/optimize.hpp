#pragma once

#include <functional>

namespace tsar {

struct BrentOptions {
  double tolerance = 1e-6;  // absolute x-tolerance
  int max_iterations = 200;
};

struct BrentResult {
  double x = 0.0;
  double value = 0.0;
  int evaluations = 0;
  int iterations = 0;
  bool converged = false;
};

/// Minimizes f on [lower, upper] by golden-section search combined with
/// successive parabolic interpolation (Brent's localmin). Non-finite values
/// are treated as +DBL_MAX. Throws OptimizerFailure if every evaluation is
/// non-finite.
BrentResult brent_minimize(const std::function<double(double)>& f, double lower, double upper,
                           const BrentOptions& options = {});

}  // namespace tsar
