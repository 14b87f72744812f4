#include "tsar/sim_study.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <iomanip>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include <boost/random/bernoulli_distribution.hpp>
#include <boost/random/chi_squared_distribution.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_real_distribution.hpp>

#include "tsar/errors.hpp"

namespace tsar {

namespace {

constexpr double kMaxFailureShare = 0.05;
constexpr std::uint64_t kLocationStream = std::numeric_limits<std::uint64_t>::max();

std::size_t band(double v, double lo, double hi, std::size_t count) {
  const double t = (v - lo) / (hi - lo) * static_cast<double>(count);
  return std::min(count - 1, static_cast<std::size_t>(std::max(0.0, std::floor(t))));
}

}  // namespace

Rng make_rng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return Rng(seq);
}

RegionPartition::RegionPartition(Window window, std::array<double, 6> scales)
    : window_(window), scales_(scales) {
  if (!(window.lat_max > window.lat_min) || !(window.lon_max > window.lon_min)) {
    fail(ErrorCode::domain_error, "empty sampling window");
  }
  for (double s : scales) {
    if (!(s > 0.0) || !std::isfinite(s)) fail(ErrorCode::domain_error, "region scales must be positive");
  }
}

std::size_t RegionPartition::region_of(const GeoPoint& p) const {
  const auto& w = window_;
  if (p.lat < w.lat_min || p.lat > w.lat_max || p.lon < w.lon_min || p.lon > w.lon_max) {
    fail(ErrorCode::domain_error, "location outside the sampling window");
  }
  return 3 * band(p.lat, w.lat_min, w.lat_max, 2) + band(p.lon, w.lon_min, w.lon_max, 3);
}

void StudyConfig::validate() const {
  if (!(nu > 2.0) || !std::isfinite(nu)) fail(ErrorCode::domain_error, "nu must exceed 2");
  if (!(std::abs(lambda) < 1.0)) fail(ErrorCode::domain_error, "|lambda| must be below 1");
  if (replications < 1) fail(ErrorCode::domain_error, "need at least one replication");
  if (beta.size() != 8) fail(ErrorCode::dimension_mismatch, "beta needs 8 entries");
  if (locations && locations->size() != n) {
    fail(ErrorCode::dimension_mismatch, "location count differs from n");
  }
  RegionPartition check(window, region_scales);
}

std::vector<GeoPoint> sample_locations(std::size_t n, const Window& window, Rng& rng) {
  boost::random::uniform_real_distribution<double> lat(window.lat_min, window.lat_max);
  boost::random::uniform_real_distribution<double> lon(window.lon_min, window.lon_max);
  std::vector<GeoPoint> out(n);
  for (auto& p : out) {
    p.lat = lat(rng);
    p.lon = lon(rng);
  }
  return out;
}

Eigen::MatrixXd simulate_covariates(std::size_t n, Rng& rng) {
  boost::random::normal_distribution<double> normal;
  boost::random::bernoulli_distribution<double> low(0.3), high(0.7);
  const auto rows = static_cast<Eigen::Index>(n);
  Eigen::MatrixXd x(rows, 8);
  for (Eigen::Index i = 0; i < rows; ++i) {
    x(i, 0) = 1.0;
    for (Eigen::Index c = 1; c <= 5; ++c) x(i, c) = normal(rng);
    x(i, 6) = low(rng) ? 1.0 : 0.0;
    x(i, 7) = high(rng) ? 1.0 : 0.0;
  }
  return x;
}

SimulatedData simulate_tsar(const Eigen::VectorXd& beta, double lambda, double nu,
                            std::span<const GeoPoint> locations, const RegionPartition& regions,
                            const SpatialOperator& op, Rng& rng) {
  const auto n = static_cast<Eigen::Index>(locations.size());
  if (op.size() != n) fail(ErrorCode::dimension_mismatch, "locations and W differ in size");
  if (beta.size() != 8) fail(ErrorCode::dimension_mismatch, "beta needs 8 entries");
  if (!(nu > 2.0)) fail(ErrorCode::domain_error, "nu must exceed 2");
  SimulatedData out;
  out.x = simulate_covariates(locations.size(), rng);
  boost::random::normal_distribution<double> normal;
  boost::random::chi_squared_distribution<double> chi2(nu);
  out.eps.resize(n);
  Eigen::VectorXd scale(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double s = regions.scale_of(locations[static_cast<std::size_t>(i)]);
    const double z = normal(rng);
    const double v = chi2(rng);
    out.eps[i] = s * z / std::sqrt(v / nu);
    scale[i] = s * s;
  }
  out.true_scale = ErrorScale::from_diagonal(std::move(scale));
  out.y = out.x * beta + (lambda == 0.0 ? out.eps : op.solve(lambda, out.eps));
  return out;
}

double rmse(const Eigen::VectorXd& truth, const Eigen::MatrixXd& estimates) {
  if (estimates.rows() < 1 || estimates.cols() < 1) {
    fail(ErrorCode::dimension_mismatch, "rmse needs at least one estimate");
  }
  if (estimates.cols() != truth.size()) {
    fail(ErrorCode::dimension_mismatch, "estimates and truth differ in dimension");
  }
  const Eigen::MatrixXd err = estimates.rowwise() - truth.transpose();
  return std::sqrt(err.array().square().colwise().mean().mean());
}

ModelFamily study_model_family(std::size_t model) {
  if (model < 1 || model > kStudyModels) fail(ErrorCode::index_out_of_range, "model index");
  return model % 2 == 1 ? ModelFamily::sar : ModelFamily::tsar;
}

ErrorScaleSource study_model_scale(std::size_t model) {
  if (model < 1 || model > kStudyModels) fail(ErrorCode::index_out_of_range, "model index");
  switch ((model - 1) / 2) {
    case 0: return ErrorScaleSource::identity;
    case 1: return ErrorScaleSource::local_regression;
    default: return ErrorScaleSource::user;
  }
}

namespace {

ReplicationEstimates run_replication(const StudyConfig& config, std::size_t index,
                                     std::span<const GeoPoint> locations,
                                     const RegionPartition& regions, const SpatialWeights& w) {
  const Eigen::VectorXd beta = Eigen::Map<const Eigen::VectorXd>(
      config.beta.data(), static_cast<Eigen::Index>(config.beta.size()));
  auto rng = make_rng(config.seed, index);
  const auto data = simulate_tsar(beta, config.lambda, config.nu, locations, regions, w.op, rng);

  const std::array<ErrorScale, 3> scales{
      ErrorScale::identity(data.y.size()),
      local_regression_variance_matrix(data.x, data.y, w.matrix), data.true_scale};

  ReplicationEstimates est;
  for (std::size_t m = 1; m <= kStudyModels; ++m) {
    const auto& scale = scales[(m - 1) / 2];
    const auto fit = study_model_family(m) == ModelFamily::sar
                         ? fit_sar(data.y, data.x, w.op, scale)
                         : fit_tsar(data.y, data.x, w.op, scale);
    est.beta[m - 1] = fit.beta;
    est.lambda[m - 1] = fit.lambda;
    est.s[m - 1] = fit.s_hat;
    est.nu[m - 1] = fit.nu.value_or(std::numeric_limits<double>::quiet_NaN());
    est.loglik[m - 1] = fit.loglik;
  }
  return est;
}

ModelSummary summarize(std::size_t model, const StudyConfig& config,
                       const std::vector<ReplicationEstimates>& reps) {
  const auto r = static_cast<Eigen::Index>(reps.size());
  const auto m = model - 1;
  const Eigen::VectorXd beta = Eigen::Map<const Eigen::VectorXd>(
      config.beta.data(), static_cast<Eigen::Index>(config.beta.size()));
  Eigen::MatrixXd b(r, beta.size());
  Eigen::MatrixXd lambda(r, 1), s(r, 1), nu(r, 1);
  Eigen::VectorXd ll(r);
  for (Eigen::Index i = 0; i < r; ++i) {
    const auto& e = reps[static_cast<std::size_t>(i)];
    b.row(i) = e.beta[m].transpose();
    lambda(i, 0) = e.lambda[m];
    s(i, 0) = e.s[m];
    nu(i, 0) = e.nu[m];
    ll[i] = e.loglik[m];
  }
  const double s_true = std::sqrt(config.nu / (config.nu - 2.0));
  ModelSummary out;
  out.model = model;
  out.rmse_beta = rmse(beta, b);
  out.rmse_lambda = rmse(Eigen::VectorXd::Constant(1, config.lambda), lambda);
  out.rmse_s = rmse(Eigen::VectorXd::Constant(1, s_true), s);
  out.mean_ll = ll.mean();
  out.mean_beta = b.colwise().mean().transpose();
  out.mean_lambda = lambda.mean();
  out.mean_s = s.mean();
  if (study_model_family(model) == ModelFamily::tsar) {
    out.rmse_nu = rmse(Eigen::VectorXd::Constant(1, config.nu), nu);
    out.mean_nu = nu.mean();
  } else {
    out.rmse_nu = out.mean_nu = std::numeric_limits<double>::quiet_NaN();
  }
  return out;
}

}  // namespace

StudyResult run_study(const StudyConfig& config) {
  config.validate();
  const RegionPartition regions(config.window, config.region_scales);
  std::vector<GeoPoint> locations;
  if (config.locations) {
    locations = *config.locations;
  } else {
    auto rng = make_rng(config.seed, kLocationStream);
    locations = sample_locations(config.n, config.window, rng);
  }
  const SpatialWeights w(knn_proximity(locations, config.k), LogDetMethod::eigenvalues);

  const std::size_t r = config.replications;
  std::vector<std::optional<ReplicationEstimates>> slots(r);
  std::atomic<std::size_t> next{0};
  std::exception_ptr fatal;
  std::mutex fatal_mutex;

  auto worker = [&] {
    for (std::size_t i = next++; i < r; i = next++) {
      try {
        slots[i] = run_replication(config, i, locations, regions, w);
      } catch (const Error&) {
        // excluded and counted below
      } catch (...) {
        std::lock_guard lock(fatal_mutex);
        if (!fatal) fatal = std::current_exception();
      }
    }
  };

  std::size_t threads = config.threads;
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, r);
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  if (fatal) std::rethrow_exception(fatal);

  StudyResult result;
  result.n = locations.size();
  for (std::size_t i = 0; i < r; ++i) {
    if (slots[i]) {
      result.replications.push_back(std::move(*slots[i]));
    } else {
      result.failed.push_back(i);
    }
  }
  result.completed = result.replications.size();
  if (static_cast<double>(result.failed.size()) > kMaxFailureShare * static_cast<double>(r) ||
      result.completed == 0) {
    fail(ErrorCode::optimizer_failure, std::to_string(result.failed.size()) + " of " +
                                           std::to_string(r) + " replications failed");
  }
  for (std::size_t m = 1; m <= kStudyModels; ++m) {
    result.models[m - 1] = summarize(m, config, result.replications);
  }
  return result;
}

std::string study_csv(const StudyResult& result) {
  std::ostringstream out;
  out << std::setprecision(17);
  out << "n,model,rmse_beta,rmse_lambda,rmse_s,rmse_nu,mean_ll,mean_beta,mean_lambda,mean_s,mean_nu\n";
  auto num = [&](double v) -> std::ostringstream& {
    if (std::isnan(v)) {
      out << "NA";
    } else {
      out << v;
    }
    return out;
  };
  for (const auto& m : result.models) {
    out << result.n << ',' << m.model << ',';
    num(m.rmse_beta) << ',';
    num(m.rmse_lambda) << ',';
    num(m.rmse_s) << ',';
    num(m.rmse_nu) << ',';
    num(m.mean_ll) << ',';
    for (Eigen::Index j = 0; j < m.mean_beta.size(); ++j) {
      if (j > 0) out << ';';
      out << m.mean_beta[j];
    }
    out << ',';
    num(m.mean_lambda) << ',';
    num(m.mean_s) << ',';
    num(m.mean_nu) << '\n';
  }
  return out.str();
}

}  // namespace tsar
