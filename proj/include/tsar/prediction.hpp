#pragma once

// Prediction at unsampled locations from their observed neighbours,
// confidence intervals for both error families, k-fold evaluation and the
// binomial likelihood-ratio calibration test.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "tsar/boxcox_select.hpp"
#include "tsar/geo_proximity.hpp"
#include "tsar/sar_core.hpp"
#include "tsar/tsar_core.hpp"

namespace tsar {

/// Standardized inverse-distance weights of an out-of-sample site over its
/// in-sample neighbours, sorted by index.
struct OosSite {
  GeoPoint location;
  Eigen::VectorXd x;  // covariate row, intercept first
  std::vector<Neighbor> weights;
  double sigma_o = 0.0;  // local residual variance over the neighbours
};

enum class PredictionScale { transformed, original };

struct IntervalPrediction {
  double point = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  double alpha = 0.05;
  ModelFamily family = ModelFamily::sar;
  PredictionScale scale = PredictionScale::transformed;
};

/// Neighbours of `site` among `points` under the fitted scheme (k nearest,
/// ties to the lower index, or all within r_km), weighted by inverse
/// distance and standardized. `exclude` drops one in-sample index, so an
/// in-sample location can be treated as its own out-of-sample site.
std::vector<Neighbor> oos_weights(const GeoPoint& site, std::span<const GeoPoint> points,
                                  const ProximityScheme& scheme,
                                  std::optional<std::size_t> exclude = std::nullopt);

/// Sample variance (denominator |N_o| - 1) of the residuals over N_o.
double oos_sigma2(const Eigen::VectorXd& residuals, std::span<const Neighbor> neighbors,
                  const LocalVarianceOptions& options = {});

/// beta^T x_o + lambda sum_j w_oj (y_j - beta^T x_j)
double oos_predict(const FitArtifact& fit, const OosSite& site, const Eigen::VectorXd& y,
                   const Eigen::MatrixXd& x);

/// point +- q sqrt(sigma^2 Sigma_o), with q the normal quantile for SAR and
/// the standardized t quantile at nu_hat for tSAR.
IntervalPrediction confidence_interval(double point, double sigma_o, const FitArtifact& fit,
                                       double alpha);

/// Monotone image of a transformed-scale interval on the original scale.
IntervalPrediction to_original_scale(const IntervalPrediction& interval, const BoxCoxSpec& spec);

/// Fold label for each of n observations: a seeded permutation cut into
/// folds of size floor(n/folds) or ceil(n/folds).
std::vector<std::size_t> kfold_partition(std::size_t n, std::size_t folds, std::uint64_t seed);

double coverage(const Eigen::VectorXd& y, std::span<const IntervalPrediction> intervals);

struct LrtResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

/// Wilks test of H0: number outside ~ Binomial(n, alpha).
LrtResult binomial_lrt(std::size_t k_outside, std::size_t n, double alpha);

struct CrossValidationOptions {
  std::size_t folds = 10;
  std::uint64_t seed = 0;
  std::vector<double> alphas{0.1, 0.05, 0.01};
  ProximityScheme scheme = ProximityScheme::knn(30);
  std::vector<ModelFamily> families{ModelFamily::sar, ModelFamily::tsar};
  LocalVarianceOptions variance;
  std::optional<BoxCoxSpec> boxcox;  // transform the response before fitting
  SarFitOptions sar;
  TsarFitOptions tsar;
  LogDetMethod log_det = LogDetMethod::automatic;
};

struct CoverageRow {
  ModelFamily family = ModelFamily::sar;
  double alpha = 0.05;
  std::size_t n = 0;
  std::size_t outside = 0;
  double coverage = 0.0;
  LrtResult lrt;
};

struct CrossValidationResult {
  std::vector<CoverageRow> rows;  // family-major, alphas in option order

  const CoverageRow& row(ModelFamily family, double alpha) const;
};

/// For each fold: fit every requested family on the remaining locations with
/// the local regression Sigma_eps, predict the held-out sites and count the
/// observations outside each interval. Coverage is computed on the
/// transformed scale, which gives the same counts as the original scale.
CrossValidationResult cross_validate(std::span<const GeoPoint> points, const Eigen::VectorXd& y,
                                     const Eigen::MatrixXd& x,
                                     const CrossValidationOptions& options);

}  // namespace tsar
