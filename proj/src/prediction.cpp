#include "tsar/prediction.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>
#include <utility>

#include <boost/random/uniform_int_distribution.hpp>

#include "tsar/distributions.hpp"
#include "tsar/errors.hpp"

namespace tsar {

namespace {

constexpr double kDegenerateRelTol = 1e-12;

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    fail(ErrorCode::domain_error, "alpha = " + std::to_string(alpha) + " must lie in (0, 1)");
  }
}

std::vector<Neighbor> standardize(std::vector<std::pair<double, std::size_t>> picked) {
  std::sort(picked.begin(), picked.end(),
            [](const auto& a, const auto& b) { return a.second < b.second; });
  double total = 0.0;
  for (const auto& [d, j] : picked) total += 1.0 / d;
  std::vector<Neighbor> out;
  out.reserve(picked.size());
  for (const auto& [d, j] : picked) out.push_back({j, (1.0 / d) / total});
  return out;
}

}  // namespace

std::vector<Neighbor> oos_weights(const GeoPoint& site, std::span<const GeoPoint> points,
                                  const ProximityScheme& scheme,
                                  std::optional<std::size_t> exclude) {
  validate(site);
  std::vector<std::pair<double, std::size_t>> cand;
  cand.reserve(points.size());
  for (std::size_t j = 0; j < points.size(); ++j) {
    if (exclude && *exclude == j) continue;
    cand.emplace_back(great_circle_distance(site, points[j]), j);
  }

  std::vector<std::pair<double, std::size_t>> picked;
  switch (scheme.kind) {
    case ProximityScheme::Kind::knn: {
      if (scheme.k < 1 || scheme.k > cand.size()) {
        fail(ErrorCode::k_out_of_range, "k = " + std::to_string(scheme.k) + " with " +
                                            std::to_string(cand.size()) + " in-sample locations");
      }
      const auto k = static_cast<std::ptrdiff_t>(scheme.k);
      std::partial_sort(cand.begin(), cand.begin() + k, cand.end());
      picked.assign(cand.begin(), cand.begin() + k);
      break;
    }
    case ProximityScheme::Kind::radius:
      if (!(scheme.r_km > 0.0)) fail(ErrorCode::domain_error, "radius must be positive");
      for (const auto& c : cand) {
        if (c.first <= scheme.r_km) picked.push_back(c);
      }
      break;
    case ProximityScheme::Kind::custom:
      fail(ErrorCode::domain_error, "out-of-sample weights need a knn or radius scheme");
  }
  if (picked.empty()) fail(ErrorCode::isolated_site, "no in-sample location within range");
  for (const auto& [d, j] : picked) {
    if (d == 0.0) {
      fail(ErrorCode::duplicate_location,
           "site coincides with in-sample location " + std::to_string(j));
    }
  }
  return standardize(std::move(picked));
}

double oos_sigma2(const Eigen::VectorXd& residuals, std::span<const Neighbor> neighbors,
                  const LocalVarianceOptions& options) {
  std::vector<std::size_t> members;
  members.reserve(neighbors.size());
  double reference = 0.0;
  for (const auto& nb : neighbors) {
    if (nb.index >= static_cast<std::size_t>(residuals.size())) {
      fail(ErrorCode::index_out_of_range, "neighbour index " + std::to_string(nb.index));
    }
    members.push_back(nb.index);
    reference = std::max(reference, std::abs(residuals[static_cast<Eigen::Index>(nb.index)]));
  }
  double v = neighborhood_variance(residuals, members);
  if (options.floor) return std::max(v, *options.floor);
  const double threshold = (kDegenerateRelTol * reference) * (kDegenerateRelTol * reference);
  if (!(v > threshold)) fail(ErrorCode::degenerate_variance, "zero residual variance around site");
  return v;
}

double oos_predict(const FitArtifact& fit, const OosSite& site, const Eigen::VectorXd& y,
                   const Eigen::MatrixXd& x) {
  if (site.x.size() != fit.beta.size() || x.cols() != fit.beta.size() || x.rows() != y.size()) {
    fail(ErrorCode::dimension_mismatch, "site, in-sample data and fit disagree in size");
  }
  double deviation = 0.0;
  for (const auto& nb : site.weights) {
    const auto j = static_cast<Eigen::Index>(nb.index);
    if (j >= y.size()) fail(ErrorCode::dimension_mismatch, "neighbour index beyond sample");
    deviation += nb.weight * (y[j] - x.row(j).dot(fit.beta));
  }
  return site.x.dot(fit.beta) + fit.lambda * deviation;
}

IntervalPrediction confidence_interval(double point, double sigma_o, const FitArtifact& fit,
                                       double alpha) {
  check_alpha(alpha);
  if (!(sigma_o > 0.0)) fail(ErrorCode::domain_error, "Sigma_o must be positive");
  const double p = 1.0 - alpha / 2.0;
  double q;
  if (fit.family == ModelFamily::tsar) {
    if (!fit.nu) fail(ErrorCode::domain_error, "tSAR fit without nu");
    q = t_quantile(p, *fit.nu);
  } else {
    q = normal_quantile(p);
  }
  const double half = q * std::sqrt(fit.sigma * fit.sigma * sigma_o);
  return {point, point - half, point + half, alpha, fit.family, PredictionScale::transformed};
}

IntervalPrediction to_original_scale(const IntervalPrediction& interval, const BoxCoxSpec& spec) {
  IntervalPrediction out = interval;
  out.point = inverse_boxcox_extended(interval.point, spec.m, spec.l);
  out.lo = inverse_boxcox_extended(interval.lo, spec.m, spec.l);
  out.hi = inverse_boxcox_extended(interval.hi, spec.m, spec.l);
  out.scale = PredictionScale::original;
  return out;
}

std::vector<std::size_t> kfold_partition(std::size_t n, std::size_t folds, std::uint64_t seed) {
  if (folds < 2 || n < folds) {
    fail(ErrorCode::domain_error,
         "need 2 <= folds <= n, got folds = " + std::to_string(folds) + ", n = " + std::to_string(n));
  }
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  for (std::size_t i = n - 1; i > 0; --i) {
    boost::random::uniform_int_distribution<std::size_t> pick(0, i);
    std::swap(perm[i], perm[pick(rng)]);
  }
  std::vector<std::size_t> fold(n);
  for (std::size_t i = 0; i < n; ++i) fold[perm[i]] = i % folds;
  return fold;
}

double coverage(const Eigen::VectorXd& y, std::span<const IntervalPrediction> intervals) {
  if (static_cast<std::size_t>(y.size()) != intervals.size()) {
    fail(ErrorCode::dimension_mismatch, "observations and intervals differ in count");
  }
  if (intervals.empty()) fail(ErrorCode::domain_error, "coverage of an empty set");
  std::size_t inside = 0;
  for (std::size_t i = 0; i < intervals.size(); ++i) {
    const double v = y[static_cast<Eigen::Index>(i)];
    if (intervals[i].lo <= v && v <= intervals[i].hi) ++inside;
  }
  return static_cast<double>(inside) / static_cast<double>(intervals.size());
}

LrtResult binomial_lrt(std::size_t k_outside, std::size_t n, double alpha) {
  check_alpha(alpha);
  if (n == 0 || k_outside > n) {
    fail(ErrorCode::domain_error, "need 0 <= k <= n and n >= 1");
  }
  const double k = static_cast<double>(k_outside);
  const double nn = static_cast<double>(n);
  const double p_hat = k / nn;
  double stat = 0.0;
  if (k_outside > 0) stat += k * std::log(p_hat / alpha);
  if (k_outside < n) stat += (nn - k) * std::log((1.0 - p_hat) / (1.0 - alpha));
  stat = std::max(0.0, 2.0 * stat);
  return {stat, chi2_1_survival(stat)};
}

const CoverageRow& CrossValidationResult::row(ModelFamily family, double alpha) const {
  for (const auto& r : rows) {
    if (r.family == family && r.alpha == alpha) return r;
  }
  fail(ErrorCode::index_out_of_range, "no coverage row for that family and alpha");
}

CrossValidationResult cross_validate(std::span<const GeoPoint> points, const Eigen::VectorXd& y,
                                     const Eigen::MatrixXd& x,
                                     const CrossValidationOptions& options) {
  const auto n = static_cast<std::size_t>(y.size());
  if (points.size() != n || static_cast<std::size_t>(x.rows()) != n) {
    fail(ErrorCode::dimension_mismatch, "points, response and design differ in length");
  }
  for (double a : options.alphas) check_alpha(a);
  const Eigen::VectorXd response =
      options.boxcox ? boxcox(y, options.boxcox->m, options.boxcox->l) : y;
  const auto fold = kfold_partition(n, options.folds, options.seed);

  const std::size_t na = options.alphas.size();
  std::vector<std::size_t> outside(options.families.size() * na, 0);

  for (std::size_t f = 0; f < options.folds; ++f) {
    std::vector<std::size_t> train, test;
    for (std::size_t i = 0; i < n; ++i) (fold[i] == f ? test : train).push_back(i);

    const auto nt = static_cast<Eigen::Index>(train.size());
    std::vector<GeoPoint> train_points(train.size());
    Eigen::VectorXd y_train(nt);
    Eigen::MatrixXd x_train(nt, x.cols());
    for (Eigen::Index r = 0; r < nt; ++r) {
      const auto i = train[static_cast<std::size_t>(r)];
      train_points[static_cast<std::size_t>(r)] = points[i];
      y_train[r] = response[static_cast<Eigen::Index>(i)];
      x_train.row(r) = x.row(static_cast<Eigen::Index>(i));
    }

    const SpatialWeights weights(build_proximity(train_points, options.scheme), options.log_det);
    const auto scale =
        local_regression_variance_matrix(x_train, y_train, weights.matrix, options.variance);
    const Eigen::VectorXd linreg = ols_fit(x_train, y_train).residuals;

    std::vector<OosSite> sites;
    sites.reserve(test.size());
    for (auto i : test) {
      OosSite site;
      site.location = points[i];
      site.x = x.row(static_cast<Eigen::Index>(i)).transpose();
      site.weights = oos_weights(site.location, train_points, options.scheme);
      site.sigma_o = oos_sigma2(linreg, site.weights, options.variance);
      sites.push_back(std::move(site));
    }

    for (std::size_t m = 0; m < options.families.size(); ++m) {
      const auto fit = options.families[m] == ModelFamily::sar
                           ? fit_sar(y_train, x_train, weights.op, scale, options.sar)
                           : fit_tsar(y_train, x_train, weights.op, scale, options.tsar);
      for (std::size_t s = 0; s < sites.size(); ++s) {
        const double point = oos_predict(fit, sites[s], y_train, x_train);
        const double observed = response[static_cast<Eigen::Index>(test[s])];
        for (std::size_t a = 0; a < na; ++a) {
          const auto ci = confidence_interval(point, sites[s].sigma_o, fit, options.alphas[a]);
          if (observed < ci.lo || observed > ci.hi) ++outside[m * na + a];
        }
      }
    }
  }

  CrossValidationResult result;
  for (std::size_t m = 0; m < options.families.size(); ++m) {
    for (std::size_t a = 0; a < na; ++a) {
      CoverageRow row;
      row.family = options.families[m];
      row.alpha = options.alphas[a];
      row.n = n;
      row.outside = outside[m * na + a];
      row.coverage = 1.0 - static_cast<double>(row.outside) / static_cast<double>(n);
      row.lrt = binomial_lrt(row.outside, n, row.alpha);
      result.rows.push_back(row);
    }
  }
  return result;
}

}  // namespace tsar
