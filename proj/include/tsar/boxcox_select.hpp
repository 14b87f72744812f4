#pragma once

// Box-Cox response transforms, Jacobian-adjusted likelihoods, BIC and
// backward stepwise covariate elimination for SAR models, plus the tSAR
// refit on the selected specification.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tsar/errors.hpp"
#include "tsar/sar_core.hpp"
#include "tsar/tsar_core.hpp"

namespace tsar {

struct BoxCoxSpec {
  double m = 0.0;  // shift
  double l = 1.0;  // power
};

/// Powers with |l| below this are treated as the log transform.
inline constexpr double kBoxCoxZeroPower = 1e-12;

double boxcox(double y, double m, double l);
Eigen::VectorXd boxcox(const Eigen::VectorXd& y, double m, double l);

/// Inverse transform; DomainError when l v + 1 <= 0.
double inverse_boxcox(double v, double m, double l);

/// Monotone extension of inverse_boxcox to the whole real line, used for
/// interval endpoints: values beyond the transform's range map to the
/// boundary of the original support (-m, or +inf for negative powers).
double inverse_boxcox_extended(double v, double m, double l);

/// (l - 1) sum_i log(y_i + m)
double boxcox_log_jacobian(const Eigen::VectorXd& y, double m, double l);

/// Jacobian term plus the model log-likelihood of the transformed response.
double adjusted_loglik(const Eigen::VectorXd& y, double m, double l, double transformed_loglik);

double bic(double loglik, int n_params, Eigen::Index n);

std::vector<double> default_l_grid();

/// Named candidate covariates, one column each (no intercept).
struct CovariatePool {
  std::vector<std::string> names;
  Eigen::MatrixXd values;

  std::size_t size() const { return names.size(); }
};

/// [1, selected columns of the pool]
Eigen::MatrixXd design_matrix(const CovariatePool& pool, std::span<const std::size_t> columns);

struct StepRecord {
  int iteration = 0;
  double l = 1.0;
  double bic = 0.0;
  double max_p = 0.0;  // NaN when no covariates remain
  std::optional<std::string> dropped;
  std::vector<double> bic_by_l;  // aligned with the l grid
};

struct SelectedModel {
  ModelFamily family = ModelFamily::sar;
  BoxCoxSpec spec;
  std::vector<std::size_t> covariates;  // pool indices
  std::vector<std::string> covariate_names;
  FitArtifact fit;
  ErrorScale scale;
  double adjusted_loglik = 0.0;
  double bic = 0.0;
  std::vector<StepRecord> trace;
};

struct StepwiseOptions {
  double m = 10.0;
  std::vector<double> l_grid = default_l_grid();
  double alpha = 0.05;
  LocalVarianceOptions variance;
  SarFitOptions sar;
};

/// Raised when a fit fails mid-procedure; carries the trace so far.
class SelectionAborted : public Error {
 public:
  SelectionAborted(const Error& cause, std::vector<StepRecord> trace);
  const std::vector<StepRecord>& trace() const { return trace_; }

 private:
  std::vector<StepRecord> trace_;
};

/// Fits a SAR model to the Box-Cox transformed response with Sigma_eps set
/// to the local regression variance matrix of the transformed response.
SelectedModel fit_transformed(ModelFamily family, const Eigen::VectorXd& response,
                              const CovariatePool& pool, std::span<const std::size_t> covariates,
                              const SpatialWeights& weights, const BoxCoxSpec& spec,
                              const LocalVarianceOptions& variance,
                              const SarFitOptions& sar_options = {},
                              const TsarFitOptions& tsar_options = {});

/// Backward elimination: per iteration, fit one SAR per power in the grid,
/// keep the BIC-minimal one and drop the non-intercept covariate with the
/// largest p-value while that p-value exceeds alpha.
SelectedModel stepwise_select(const Eigen::VectorXd& response, const CovariatePool& pool,
                              const SpatialWeights& weights, const StepwiseOptions& options = {});

/// tSAR refit (nu estimated) with the covariates and transform of a SAR
/// selection; BIC includes the Jacobian and counts nu as a parameter.
SelectedModel tsar_companion(const SelectedModel& selected, const Eigen::VectorXd& response,
                             const CovariatePool& pool, const SpatialWeights& weights,
                             const LocalVarianceOptions& variance = {},
                             const TsarFitOptions& options = {});

}  // namespace tsar
