#include "tsar/boxcox_select.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace tsar {

namespace {

bool is_log_power(double l) { return std::abs(l) < kBoxCoxZeroPower; }

void check_shifted(double y, double m) {
  if (!(y + m > 0.0) || !std::isfinite(y + m)) {
    fail(ErrorCode::non_positive_shifted_response,
         "y + m = " + std::to_string(y + m) + " must be positive");
  }
}

}  // namespace

double boxcox(double y, double m, double l) {
  check_shifted(y, m);
  if (is_log_power(l)) return std::log(y + m);
  return (std::pow(y + m, l) - 1.0) / l;
}

Eigen::VectorXd boxcox(const Eigen::VectorXd& y, double m, double l) {
  Eigen::VectorXd out(y.size());
  for (Eigen::Index i = 0; i < y.size(); ++i) out[i] = boxcox(y[i], m, l);
  return out;
}

double inverse_boxcox(double v, double m, double l) {
  if (is_log_power(l)) return std::exp(v) - m;
  const double base = l * v + 1.0;
  if (!(base > 0.0)) {
    fail(ErrorCode::domain_error, "l * v + 1 = " + std::to_string(base) + " is not positive");
  }
  return std::pow(base, 1.0 / l) - m;
}

double inverse_boxcox_extended(double v, double m, double l) {
  if (is_log_power(l)) return std::exp(v) - m;
  const double base = l * v + 1.0;
  if (base > 0.0) return std::pow(base, 1.0 / l) - m;
  // l > 0: v below the range; l < 0: v above it
  return l > 0.0 ? -m : std::numeric_limits<double>::infinity();
}

double boxcox_log_jacobian(const Eigen::VectorXd& y, double m, double l) {
  double sum = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    check_shifted(y[i], m);
    sum += std::log(y[i] + m);
  }
  return (l - 1.0) * sum;
}

double adjusted_loglik(const Eigen::VectorXd& y, double m, double l, double transformed_loglik) {
  return boxcox_log_jacobian(y, m, l) + transformed_loglik;
}

double bic(double loglik, int n_params, Eigen::Index n) {
  if (n < 1) fail(ErrorCode::domain_error, "BIC needs n >= 1");
  return -2.0 * loglik + static_cast<double>(n_params) * std::log(static_cast<double>(n));
}

std::vector<double> default_l_grid() {
  return {-2.0, -1.0, -0.5, -1.0 / 3.0, 0.0, 1.0 / 3.0, 0.5, 1.0, 2.0};
}

Eigen::MatrixXd design_matrix(const CovariatePool& pool, std::span<const std::size_t> columns) {
  const auto n = pool.values.rows();
  Eigen::MatrixXd x(n, static_cast<Eigen::Index>(columns.size()) + 1);
  x.col(0).setOnes();
  for (std::size_t c = 0; c < columns.size(); ++c) {
    if (columns[c] >= pool.size() || static_cast<Eigen::Index>(columns[c]) >= pool.values.cols()) {
      fail(ErrorCode::index_out_of_range, "covariate index " + std::to_string(columns[c]));
    }
    x.col(static_cast<Eigen::Index>(c) + 1) = pool.values.col(static_cast<Eigen::Index>(columns[c]));
  }
  return x;
}

SelectionAborted::SelectionAborted(const Error& cause, std::vector<StepRecord> trace)
    : Error(cause.code(), std::string("stepwise selection aborted after ") +
                              std::to_string(trace.size()) + " iterations: " + cause.what()),
      trace_(std::move(trace)) {}

SelectedModel fit_transformed(ModelFamily family, const Eigen::VectorXd& response,
                              const CovariatePool& pool, std::span<const std::size_t> covariates,
                              const SpatialWeights& weights, const BoxCoxSpec& spec,
                              const LocalVarianceOptions& variance,
                              const SarFitOptions& sar_options, const TsarFitOptions& tsar_options) {
  if (pool.values.rows() != response.size()) {
    fail(ErrorCode::dimension_mismatch, "covariates and response differ in length");
  }
  SelectedModel out;
  out.family = family;
  out.spec = spec;
  out.covariates.assign(covariates.begin(), covariates.end());
  for (auto c : covariates) out.covariate_names.push_back(pool.names.at(c));

  const Eigen::MatrixXd x = design_matrix(pool, covariates);
  const Eigen::VectorXd transformed = boxcox(response, spec.m, spec.l);
  out.scale = local_regression_variance_matrix(x, transformed, weights.matrix, variance);
  out.fit = family == ModelFamily::sar
                ? fit_sar(transformed, x, weights.op, out.scale, sar_options)
                : fit_tsar(transformed, x, weights.op, out.scale, tsar_options);
  out.adjusted_loglik = adjusted_loglik(response, spec.m, spec.l, out.fit.loglik);
  out.bic = bic(out.adjusted_loglik, out.fit.parameter_count(), response.size());
  return out;
}

SelectedModel stepwise_select(const Eigen::VectorXd& response, const CovariatePool& pool,
                              const SpatialWeights& weights, const StepwiseOptions& options) {
  if (options.l_grid.empty()) fail(ErrorCode::domain_error, "empty Box-Cox power grid");
  if (!(options.alpha > 0.0 && options.alpha < 1.0)) {
    fail(ErrorCode::domain_error, "alpha must lie in (0, 1)");
  }
  if (pool.values.cols() != static_cast<Eigen::Index>(pool.size())) {
    fail(ErrorCode::dimension_mismatch, "covariate names and columns differ in count");
  }

  std::vector<std::size_t> current(pool.size());
  for (std::size_t c = 0; c < current.size(); ++c) current[c] = c;

  std::vector<StepRecord> trace;
  for (int iteration = 1;; ++iteration) {
    StepRecord record;
    record.iteration = iteration;
    std::optional<SelectedModel> best;
    try {
      for (const double l : options.l_grid) {
        auto candidate = fit_transformed(ModelFamily::sar, response, pool, current, weights,
                                         {options.m, l}, options.variance, options.sar);
        record.bic_by_l.push_back(candidate.bic);
        if (!best || candidate.bic < best->bic) best = std::move(candidate);
      }
    } catch (const Error& e) {
      throw SelectionAborted(e, trace);
    }
    record.l = best->spec.l;
    record.bic = best->bic;
    record.max_p = std::numeric_limits<double>::quiet_NaN();

    // p-values of the non-intercept coefficients
    std::size_t worst = 0;
    for (std::size_t c = 0; c < current.size(); ++c) {
      const double p = best->fit.p_values[static_cast<Eigen::Index>(c) + 1];
      if (c == 0 || p > record.max_p) {
        record.max_p = p;
        worst = c;
      }
    }
    const bool drop = !current.empty() && record.max_p > options.alpha;
    if (drop) record.dropped = pool.names[current[worst]];
    trace.push_back(record);
    if (!drop) {
      best->trace = std::move(trace);
      return std::move(*best);
    }
    current.erase(current.begin() + static_cast<std::ptrdiff_t>(worst));
  }
}

SelectedModel tsar_companion(const SelectedModel& selected, const Eigen::VectorXd& response,
                             const CovariatePool& pool, const SpatialWeights& weights,
                             const LocalVarianceOptions& variance, const TsarFitOptions& options) {
  auto out = fit_transformed(ModelFamily::tsar, response, pool, selected.covariates, weights,
                             selected.spec, variance, {}, options);
  out.trace = selected.trace;
  return out;
}

}  // namespace tsar
