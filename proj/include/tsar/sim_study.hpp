#pragma once

// Monte Carlo comparison of SAR and tSAR estimators on simulated tSAR data
// with region-wise heteroscedastic errors.

#include <array>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tsar/geo_proximity.hpp"
#include "tsar/sar_core.hpp"
#include "tsar/spatial_operator.hpp"
#include "tsar/tsar_core.hpp"

namespace tsar {

/// Engine behind every simulation; streams are derived from (seed, index).
using Rng = std::mt19937_64;

Rng make_rng(std::uint64_t seed, std::uint64_t stream);

struct Window {
  double lat_min = 24.0;
  double lat_max = 49.0;
  double lon_min = -125.0;
  double lon_max = -66.0;
};

/// Six rectangles from a 3 (longitude) x 2 (latitude) grid over the window,
/// each with its error scale. Region index = 3 * lat_band + lon_band, with
/// band 0 the southern/western one.
class RegionPartition {
 public:
  explicit RegionPartition(Window window = {},
                           std::array<double, 6> scales = {4.0, 0.6, 5.0, 0.3, 4.0, 6.0});

  const Window& window() const { return window_; }
  const std::array<double, 6>& scales() const { return scales_; }

  /// Region of a point inside the window; DomainError outside it.
  std::size_t region_of(const GeoPoint& p) const;
  double scale_of(const GeoPoint& p) const { return scales_[region_of(p)]; }

 private:
  Window window_;
  std::array<double, 6> scales_;
};

struct StudyConfig {
  std::size_t n = 250;
  std::size_t k = 30;
  double nu = 4.0;
  double lambda = 0.8;
  std::vector<double> beta{3, 10, 4, 5, 2, 8, 1, 3};
  std::size_t replications = 50;
  std::uint64_t seed = 1;
  std::size_t threads = 0;  // 0: hardware concurrency
  Window window;
  std::array<double, 6> region_scales{4.0, 0.6, 5.0, 0.3, 4.0, 6.0};
  std::optional<std::vector<GeoPoint>> locations;  // sampled from the seed when absent

  /// DomainError unless nu > 2, |lambda| < 1, r >= 1, beta has 8 entries.
  void validate() const;
};

/// n uniform draws over the window's lat/lon box.
std::vector<GeoPoint> sample_locations(std::size_t n, const Window& window, Rng& rng);

/// Columns: 1, five standard normals, Bernoulli(0.3), Bernoulli(0.7).
Eigen::MatrixXd simulate_covariates(std::size_t n, Rng& rng);

struct SimulatedData {
  Eigen::VectorXd y;
  Eigen::MatrixXd x;
  Eigen::VectorXd eps;
  ErrorScale true_scale;  // squared region scales
};

/// eps_i = s_j Z / sqrt(V / nu) with Z ~ N(0,1), V ~ chi2(nu), and y solving
/// (I - lambda W)(y - X beta) = eps.
SimulatedData simulate_tsar(const Eigen::VectorXd& beta, double lambda, double nu,
                            std::span<const GeoPoint> locations, const RegionPartition& regions,
                            const SpatialOperator& op, Rng& rng);

/// sqrt((1/p) sum_j (1/r) sum_i (theta_j - est_ij)^2), est is r x p.
double rmse(const Eigen::VectorXd& truth, const Eigen::MatrixXd& estimates);

inline constexpr std::size_t kStudyModels = 6;

/// Model m (1-based): odd m SAR, even m tSAR; Sigma_eps identity for 1-2,
/// local regression for 3-4, the true scale for 5-6.
ModelFamily study_model_family(std::size_t model);
ErrorScaleSource study_model_scale(std::size_t model);

struct ModelSummary {
  std::size_t model = 0;
  double rmse_beta = 0.0;
  double rmse_lambda = 0.0;
  double rmse_s = 0.0;
  double rmse_nu = 0.0;  // NaN for SAR models
  double mean_ll = 0.0;
  Eigen::VectorXd mean_beta;
  double mean_lambda = 0.0;
  double mean_s = 0.0;
  double mean_nu = 0.0;  // NaN for SAR models
};

struct ReplicationEstimates {
  std::array<Eigen::VectorXd, kStudyModels> beta;
  std::array<double, kStudyModels> lambda{};
  std::array<double, kStudyModels> s{};
  std::array<double, kStudyModels> nu{};
  std::array<double, kStudyModels> loglik{};
};

struct StudyResult {
  std::size_t n = 0;
  std::size_t completed = 0;
  std::vector<std::size_t> failed;  // replication indices excluded
  std::array<ModelSummary, kStudyModels> models;
  std::vector<ReplicationEstimates> replications;  // successful ones, index order
};

/// Every replication draws its data from its own stream and fits all six
/// models; failed replications are excluded and listed, and more than 5%
/// failures abort the study.
StudyResult run_study(const StudyConfig& config);

/// CSV with one row per model.
std::string study_csv(const StudyResult& result);

}  // namespace tsar
