// sartool: command-line front end for SAR / tSAR fitting, selection,
// prediction, cross-validation and simulation.

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <optional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tsar/boxcox_select.hpp"
#include "tsar/dataset.hpp"
#include "tsar/diagnostics.hpp"
#include "tsar/distributions.hpp"
#include "tsar/errors.hpp"
#include "tsar/prediction.hpp"
#include "tsar/serialization.hpp"
#include "tsar/sim_study.hpp"

using namespace tsar;

namespace {

// Options shared by the dataset-driven subcommands. Flags win over
// --config values, which win over the defaults.
struct ModelFlags {
  std::string data;
  std::string config;
  std::string response;
  std::vector<std::string> covariates;
  std::string model = "sar";
  std::size_t knn = 30;
  double r_km = 0.0;
  std::string sigma_eps = "local-regression";
  double variance_floor = 0.0;
  double boxcox_m = 10.0;
  double boxcox_l = 1.0;
  double nu = 0.0;

  CLI::Option* o_response = nullptr;
  CLI::Option* o_covariates = nullptr;
  CLI::Option* o_model = nullptr;
  CLI::Option* o_knn = nullptr;
  CLI::Option* o_r_km = nullptr;
  CLI::Option* o_sigma = nullptr;
  CLI::Option* o_floor = nullptr;
  CLI::Option* o_m = nullptr;
  CLI::Option* o_l = nullptr;
  CLI::Option* o_nu = nullptr;

  RunConfig file;

  void add(CLI::App& app, bool with_model, bool with_boxcox) {
    app.add_option("--data", data, "dataset CSV (id, lat, lon, numeric columns)")->required();
    app.add_option("--config", config, "JSON run configuration");
    o_response = app.add_option("--response", response, "response column");
    o_covariates = app.add_option("--covariates", covariates, "covariate columns (default: all others)")
                       ->delimiter(',');
    if (with_model) {
      o_model = app.add_option("--model", model, "sar or tsar")
                    ->check(CLI::IsMember({"sar", "tsar"}));
      o_nu = app.add_option("--nu", nu, "fix nu for tSAR instead of estimating it");
    }
    o_knn = app.add_option("--knn", knn, "k nearest neighbours (default 30)");
    o_r_km = app.add_option("--r-km", r_km, "neighbourhood radius in km")->excludes(o_knn);
    o_sigma = app.add_option("--sigma-eps", sigma_eps,
                             "identity | local-regression | file:PATH");
    o_floor = app.add_option("--variance-floor", variance_floor,
                             "raise local variances below this value instead of failing");
    if (with_boxcox) {
      o_m = app.add_option("--boxcox-m,--m", boxcox_m, "Box-Cox shift m");
      o_l = app.add_option("--boxcox-l", boxcox_l, "Box-Cox power l (omit for no transform)");
    }
  }

  void load_config() {
    if (!config.empty()) file = load_run_config(config);
    auto take = [](CLI::Option* opt, auto& target, const auto& from_file) {
      if ((opt == nullptr || opt->count() == 0) && from_file) target = *from_file;
    };
    take(o_response, response, file.response);
    take(o_covariates, covariates, file.covariates);
    take(o_model, model, file.model);
    take(o_sigma, sigma_eps, file.sigma_eps);
    take(o_floor, variance_floor, file.variance_floor);
    take(o_m, boxcox_m, file.boxcox_m);
    take(o_l, boxcox_l, file.boxcox_l);
    take(o_nu, nu, file.nu);
    const bool flag_scheme = o_knn->count() > 0 || o_r_km->count() > 0;
    if (!flag_scheme) {
      if (file.knn) knn = *file.knn;
      if (file.r_km) r_km = *file.r_km;
    }
    if (response.empty()) fail(ErrorCode::domain_error, "no response column given (--response)");
  }

  ProximityScheme scheme() const {
    if (r_km > 0.0) return ProximityScheme::radius(r_km);
    return ProximityScheme::knn(knn);
  }

  bool has_boxcox() const {
    return (o_l != nullptr && o_l->count() > 0) || file.boxcox_l.has_value();
  }
  std::optional<BoxCoxSpec> boxcox() const {
    if (!has_boxcox()) return std::nullopt;
    return BoxCoxSpec{boxcox_m, boxcox_l};
  }

  LocalVarianceOptions variance() const {
    LocalVarianceOptions v;
    if (variance_floor > 0.0) v.floor = variance_floor;
    return v;
  }

  std::vector<std::string> covariate_names(const SpatialDataset& ds) const {
    if (!covariates.empty()) return covariates;
    std::vector<std::string> out;
    for (const auto& name : ds.column_names) {
      if (name != response) out.push_back(name);
    }
    return out;
  }

  TsarFitOptions tsar_options() const {
    TsarFitOptions o;
    if (nu > 0.0) o.nu = NuSpec::fixed_at(nu);
    return o;
  }
};

Eigen::MatrixXd with_intercept(const Eigen::MatrixXd& covariates) {
  Eigen::MatrixXd x(covariates.rows(), covariates.cols() + 1);
  x.col(0).setOnes();
  x.rightCols(covariates.cols()) = covariates;
  return x;
}

Eigen::VectorXd read_scale_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::parse_error, "cannot open " + path);
  std::vector<double> values;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream s(line);
    double v;
    if (!(s >> v)) {
      if (line_no == 1) continue;  // header
      fail(ErrorCode::parse_error, path + ": cannot read line " + std::to_string(line_no));
    }
    values.push_back(v);
  }
  return Eigen::Map<Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

ErrorScale make_scale(const std::string& source, const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                      const ProximityMatrix& w, const LocalVarianceOptions& variance) {
  if (source == "identity") return ErrorScale::identity(y.size());
  if (source == "local-regression") return local_regression_variance_matrix(x, y, w, variance);
  if (source.rfind("file:", 0) == 0) {
    auto diag = read_scale_file(source.substr(5));
    if (diag.size() != y.size()) {
      fail(ErrorCode::dimension_mismatch, "Sigma_eps file has " + std::to_string(diag.size()) +
                                              " values for " + std::to_string(y.size()) +
                                              " locations");
    }
    return ErrorScale::from_diagonal(std::move(diag));
  }
  fail(ErrorCode::domain_error, "unknown --sigma-eps source '" + source + "'");
}

void print_fit(std::ostream& out, const FitArtifact& fit, const std::vector<std::string>& names) {
  out << std::setprecision(6);
  out << "model      " << family_name(fit.family) << "\n";
  out << "lambda     " << fit.lambda << "\n";
  out << "sigma      " << fit.sigma << "\n";
  if (fit.nu) out << "nu         " << *fit.nu << (fit.nu_estimated ? "" : " (fixed)") << "\n";
  out << "s_hat      " << fit.s_hat << "\n";
  out << "loglik     " << fit.loglik << "\n\n";
  out << std::left << std::setw(16) << "term" << std::right << std::setw(14) << "estimate"
      << std::setw(14) << "se" << std::setw(14) << "z" << std::setw(14) << "p" << "\n";
  for (Eigen::Index i = 0; i < fit.beta.size(); ++i) {
    const std::string name = i == 0 ? "(intercept)" : names[static_cast<std::size_t>(i - 1)];
    out << std::left << std::setw(16) << name << std::right << std::setw(14) << fit.beta[i]
        << std::setw(14) << fit.se_beta[i] << std::setw(14) << fit.z_scores[i] << std::setw(14)
        << fit.p_values[i] << "\n";
  }
  for (const auto& w : fit.warnings) out << "warning: " << w << "\n";
  out << "note: " << kInferenceCaveat << "\n";
}

std::ostream& output(const std::string& path, std::ofstream& file) {
  if (path.empty() || path == "-") return std::cout;
  file.open(path);
  if (!file) fail(ErrorCode::parse_error, "cannot write " + path);
  return file;
}

void write_residuals(const std::string& path, const SpatialDataset& ds, const FitArtifact& fit) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::parse_error, "cannot write " + path);
  out << std::setprecision(17) << "id,fitted,residual,std_residual\n";
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    out << ds.ids[i] << ',' << fit.fitted[r] << ',' << fit.residuals[r] << ','
        << fit.std_residuals[r] << '\n';
  }
}

// --- proximity ---------------------------------------------------------------

struct ProximityCmd {
  std::string data, out;
  std::size_t knn = 30;
  double r_km = 0.0;
  CLI::Option* o_r = nullptr;

  void add(CLI::App& app) {
    app.add_option("--data", data, "dataset CSV")->required();
    auto* o_k = app.add_option("--knn", knn, "k nearest neighbours (default 30)");
    o_r = app.add_option("--r-km", r_km, "neighbourhood radius in km")->excludes(o_k);
    app.add_option("--out", out, "output JSON (default stdout)");
  }

  void run() const {
    const auto ds = load_dataset(data);
    const auto scheme = r_km > 0.0 ? ProximityScheme::radius(r_km) : ProximityScheme::knn(knn);
    const auto w = build_proximity(ds.points, scheme);
    std::ofstream file;
    output(out, file) << proximity_to_json(w).dump() << "\n";
  }
};

// --- fit ---------------------------------------------------------------------

struct FitCmd {
  ModelFlags flags;
  std::string out, residuals;

  void add(CLI::App& app) {
    flags.add(app, true, true);
    app.add_option("--out", out, "write the fit as JSON");
    app.add_option("--residuals", residuals, "write fitted values and residuals as CSV");
  }

  void run() {
    flags.load_config();
    const auto ds = load_dataset(flags.data);
    const auto names = flags.covariate_names(ds);
    const Eigen::MatrixXd x = with_intercept(ds.columns(names));
    const auto spec = flags.boxcox();
    const Eigen::VectorXd raw = ds.column(flags.response);
    const Eigen::VectorXd y = spec ? boxcox(raw, spec->m, spec->l) : raw;

    const SpatialWeights w(build_proximity(ds.points, flags.scheme()));
    const auto scale = make_scale(flags.sigma_eps, x, y, w.matrix, flags.variance());
    FitDocument doc;
    doc.fit = flags.model == "tsar" ? fit_tsar(y, x, w.op, scale, flags.tsar_options())
                                    : fit_sar(y, x, w.op, scale);
    doc.meta = {flags.response, names, flags.scheme(), flags.sigma_eps, spec, ds.size()};
    print_fit(std::cout, doc.fit, names);
    if (spec) {
      const double adj = adjusted_loglik(raw, spec->m, spec->l, doc.fit.loglik);
      std::cout << "loglik incl. Jacobian " << adj << ", BIC "
                << bic(adj, doc.fit.parameter_count(), raw.size()) << "\n";
    }
    if (!out.empty()) save_fit(out, doc);
    if (!residuals.empty()) write_residuals(residuals, ds, doc.fit);
  }
};

// --- select ------------------------------------------------------------------

struct SelectCmd {
  ModelFlags flags;
  std::vector<double> l_grid = default_l_grid();
  double alpha = 0.05;
  std::string out, out_tsar, trace;
  std::string family = "sar+tsar";
  CLI::Option* o_grid = nullptr;
  CLI::Option* o_alpha = nullptr;

  void add(CLI::App& app) {
    flags.add(app, false, true);
    o_grid = app.add_option("--l-grid", l_grid, "Box-Cox powers to try")->delimiter(',');
    o_alpha = app.add_option("--alpha", alpha, "drop covariates with p above this (default 0.05)");
    app.add_option("--out", out, "write the selected SAR fit as JSON");
    app.add_option("--out-tsar", out_tsar, "write the tSAR refit as JSON");
    app.add_option("--trace", trace, "write the elimination trace as CSV");
    app.add_option("--family", family, "sar, or sar+tsar to add the tSAR refit (default)")
        ->check(CLI::IsMember({"sar", "sar+tsar"}));
  }

  void run() {
    flags.load_config();
    if (o_grid->count() == 0 && flags.file.l_grid) l_grid = *flags.file.l_grid;
    if (o_alpha->count() == 0 && flags.file.select_alpha) alpha = *flags.file.select_alpha;
    if (flags.sigma_eps != "local-regression") {
      fail(ErrorCode::domain_error, "select always uses the local regression Sigma_eps");
    }
    const auto ds = load_dataset(flags.data);
    CovariatePool pool;
    pool.names = flags.covariate_names(ds);
    pool.values = ds.columns(pool.names);
    const Eigen::VectorXd y = ds.column(flags.response);
    const SpatialWeights w(build_proximity(ds.points, flags.scheme()));

    StepwiseOptions opts;
    opts.m = flags.boxcox_m;
    opts.l_grid = l_grid;
    opts.alpha = alpha;
    opts.variance = flags.variance();

    SelectedModel sar;
    try {
      sar = stepwise_select(y, pool, w, opts);
    } catch (const SelectionAborted& e) {
      print_trace(std::cerr, e.trace());
      throw;
    }
    std::optional<SelectedModel> t;
    if (family == "sar+tsar") t = tsar_companion(sar, y, pool, w, opts.variance);

    print_trace(std::cout, sar.trace);
    std::cout << "\nselected l = " << sar.spec.l << ", covariates:";
    for (const auto& n : sar.covariate_names) std::cout << ' ' << n;
    std::cout << "\n\n";
    print_fit(std::cout, sar.fit, sar.covariate_names);
    std::cout << "BIC (with Box-Cox Jacobian) " << sar.bic << "\n";
    if (t) {
      std::cout << "\n";
      print_fit(std::cout, t->fit, t->covariate_names);
      std::cout << "BIC (with Box-Cox Jacobian) " << t->bic << "\n";
    }

    auto document = [&](const SelectedModel& s) {
      return FitDocument{s.fit, {flags.response, s.covariate_names, flags.scheme(),
                                 "local-regression", s.spec, ds.size()}};
    };
    if (!out.empty()) save_fit(out, document(sar));
    if (!out_tsar.empty()) {
      if (!t) fail(ErrorCode::domain_error, "--out-tsar needs --family sar+tsar");
      save_fit(out_tsar, document(*t));
    }
    if (!trace.empty()) {
      std::ofstream f(trace);
      if (!f) fail(ErrorCode::parse_error, "cannot write " + trace);
      trace_csv(f, sar.trace);
    }
  }

  void print_trace(std::ostream& out, const std::vector<StepRecord>& records) const {
    out << std::setprecision(6) << "iteration  l          BIC            max p          dropped\n";
    for (const auto& r : records) {
      out << std::left << std::setw(11) << r.iteration << std::setw(11) << r.l << std::setw(15)
          << r.bic << std::setw(15) << r.max_p << r.dropped.value_or("-") << std::right << "\n";
    }
  }

  void trace_csv(std::ostream& out, const std::vector<StepRecord>& records) const {
    out << std::setprecision(17) << "iteration,l,bic,max_p,dropped";
    for (double l : l_grid) out << ",bic_l=" << l;
    out << "\n";
    for (const auto& r : records) {
      out << r.iteration << ',' << r.l << ',' << r.bic << ',' << r.max_p << ','
          << r.dropped.value_or("");
      for (double b : r.bic_by_l) out << ',' << b;
      out << "\n";
    }
  }
};

// --- predict -----------------------------------------------------------------

struct PredictCmd {
  std::string fit_path, insample, sites, out;
  double alpha = 0.1;
  bool original_scale = false;
  double variance_floor = 0.0;

  void add(CLI::App& app) {
    app.add_option("--fit", fit_path, "fit JSON from `fit` or `select`")->required();
    app.add_option("--insample", insample, "dataset the model was fitted on")->required();
    app.add_option("--sites", sites, "CSV of sites to predict (id, lat, lon, covariates)")
        ->required();
    app.add_option("--alpha", alpha, "interval level 1 - alpha (default 0.1)");
    app.add_flag("--original-scale", original_scale, "report on the untransformed scale");
    app.add_option("--variance-floor", variance_floor, "floor for the local residual variance");
    app.add_option("--out", out, "output CSV (default stdout)");
  }

  void run() const {
    const auto doc = load_fit(fit_path);
    const auto& meta = doc.meta;
    const auto ds = load_dataset(insample);
    if (ds.size() != meta.n) {
      fail(ErrorCode::dimension_mismatch, "fit was made on " + std::to_string(meta.n) +
                                              " rows, in-sample file has " +
                                              std::to_string(ds.size()));
    }
    const auto targets = load_dataset(sites);
    const Eigen::MatrixXd x = with_intercept(ds.columns(meta.covariates));
    const Eigen::MatrixXd x_sites = with_intercept(targets.columns(meta.covariates));
    const Eigen::VectorXd raw = ds.column(meta.response);
    const Eigen::VectorXd y = meta.boxcox ? boxcox(raw, meta.boxcox->m, meta.boxcox->l) : raw;
    const Eigen::VectorXd linreg = ols_fit(x, y).residuals;
    if (original_scale && !meta.boxcox) {
      fail(ErrorCode::domain_error, "--original-scale needs a Box-Cox fit");
    }
    LocalVarianceOptions variance;
    if (variance_floor > 0.0) variance.floor = variance_floor;

    std::ofstream file;
    auto& os = output(out, file);
    os << std::setprecision(17) << "site_id,point,lo,hi\n";
    for (std::size_t s = 0; s < targets.size(); ++s) {
      // a site that is an in-sample location is predicted from the others
      std::optional<std::size_t> self;
      for (std::size_t i = 0; i < ds.size(); ++i) {
        if (ds.ids[i] == targets.ids[s] && ds.points[i] == targets.points[s]) self = i;
      }
      OosSite site;
      site.location = targets.points[s];
      site.x = x_sites.row(static_cast<Eigen::Index>(s)).transpose();
      site.weights = oos_weights(site.location, ds.points, meta.scheme, self);
      site.sigma_o = oos_sigma2(linreg, site.weights, variance);
      auto ci = confidence_interval(oos_predict(doc.fit, site, y, x), site.sigma_o, doc.fit, alpha);
      if (original_scale) ci = to_original_scale(ci, *meta.boxcox);
      os << targets.ids[s] << ',' << ci.point << ',' << ci.lo << ',' << ci.hi << '\n';
    }
  }
};

// --- crossval ----------------------------------------------------------------

struct CrossvalCmd {
  ModelFlags flags;
  std::size_t folds = 10;
  std::uint64_t seed = 0;
  std::vector<double> alphas{0.1, 0.05, 0.01};
  std::string out;
  CLI::Option *o_folds = nullptr, *o_seed = nullptr, *o_alphas = nullptr;

  void add(CLI::App& app) {
    flags.add(app, false, true);
    o_folds = app.add_option("--folds", folds, "number of folds (default 10)");
    o_seed = app.add_option("--seed", seed, "seed for the fold assignment");
    o_alphas = app.add_option("--alphas", alphas, "interval levels")->delimiter(',');
    app.add_option("--out", out, "coverage table CSV (default stdout)");
  }

  void run() {
    flags.load_config();
    if (o_folds->count() == 0 && flags.file.folds) folds = *flags.file.folds;
    if (o_seed->count() == 0 && flags.file.seed) seed = *flags.file.seed;
    if (o_alphas->count() == 0 && flags.file.alphas) alphas = *flags.file.alphas;
    if (flags.sigma_eps != "local-regression") {
      fail(ErrorCode::domain_error, "crossval always uses the local regression Sigma_eps");
    }
    const auto ds = load_dataset(flags.data);
    const auto names = flags.covariate_names(ds);
    CrossValidationOptions opts;
    opts.folds = folds;
    opts.seed = seed;
    opts.alphas = alphas;
    opts.scheme = flags.scheme();
    opts.variance = flags.variance();
    opts.boxcox = flags.boxcox();
    opts.tsar = flags.tsar_options();
    const auto result = cross_validate(ds.points, ds.column(flags.response),
                                       with_intercept(ds.columns(names)), opts);
    std::ofstream file;
    auto& os = output(out, file);
    os << std::setprecision(10) << "model,alpha,level,n,outside,coverage,lrt_statistic,lrt_p\n";
    for (const auto& r : result.rows) {
      os << family_name(r.family) << ',' << r.alpha << ',' << 1.0 - r.alpha << ',' << r.n << ','
         << r.outside << ',' << r.coverage << ',' << r.lrt.statistic << ',' << r.lrt.p_value
         << '\n';
    }
  }
};

// --- study / simulate ----------------------------------------------------------

std::vector<GeoPoint> read_locations(const std::string& path) {
  return load_dataset(path).points;
}

struct StudyCmd {
  std::string config, out, locations;
  std::size_t replications = 50, threads = 0;
  std::uint64_t seed = 1;
  CLI::Option *o_r = nullptr, *o_seed = nullptr, *o_threads = nullptr;

  void add(CLI::App& app) {
    app.add_option("--config", config, "study configuration JSON");
    o_r = app.add_option("--replications", replications, "number of replications");
    o_seed = app.add_option("--seed", seed, "master seed");
    o_threads = app.add_option("--threads", threads, "worker threads (0: all cores)");
    app.add_option("--locations", locations, "CSV with id, lat, lon to use as locations");
    app.add_option("--out", out, "results CSV (default stdout)");
  }

  void run() const {
    StudyConfig c = config.empty() ? StudyConfig{} : load_study_config(config);
    if (o_r->count() > 0) c.replications = replications;
    if (o_seed->count() > 0) c.seed = seed;
    if (o_threads->count() > 0) c.threads = threads;
    if (!locations.empty()) {
      c.locations = read_locations(locations);
      c.n = c.locations->size();
    }
    const auto result = run_study(c);
    if (!result.failed.empty()) {
      std::cerr << result.failed.size() << " replications failed and were excluded\n";
    }
    std::ofstream file;
    output(out, file) << study_csv(result);
  }
};

struct SimulateCmd {
  std::size_t n = 250, k = 30;
  double nu = 4.0, lambda = 0.8;
  std::uint64_t seed = 1;
  std::string locations, out, scale_out;

  void add(CLI::App& app) {
    app.add_option("--n", n, "number of locations");
    app.add_option("--k", k, "nearest neighbours in W");
    app.add_option("--nu", nu, "degrees of freedom of the errors");
    app.add_option("--lambda", lambda, "spatial dependence");
    app.add_option("--seed", seed, "seed");
    app.add_option("--locations", locations, "CSV with id, lat, lon to use as locations");
    app.add_option("--out", out, "dataset CSV (default stdout)");
    app.add_option("--true-scale", scale_out, "write the true Sigma_eps diagonal here");
  }

  void run() const {
    StudyConfig c;
    c.n = n;
    c.k = k;
    c.nu = nu;
    c.lambda = lambda;
    c.seed = seed;
    c.replications = 1;
    auto rng = make_rng(seed, 0);
    const auto points = locations.empty() ? sample_locations(n, c.window, rng)
                                          : read_locations(locations);
    c.n = points.size();
    c.validate();
    const SpatialWeights w(knn_proximity(points, k));
    const Eigen::VectorXd beta = Eigen::Map<const Eigen::VectorXd>(c.beta.data(), 8);
    const auto data = simulate_tsar(beta, lambda, nu, points, RegionPartition(c.window), w.op, rng);

    std::ofstream file;
    auto& os = output(out, file);
    os << std::setprecision(17) << "id,lat,lon,y,x1,x2,x3,x4,x5,x6,x7\n";
    for (std::size_t i = 0; i < points.size(); ++i) {
      const auto r = static_cast<Eigen::Index>(i);
      os << 's' << i << ',' << points[i].lat << ',' << points[i].lon << ',' << data.y[r];
      for (Eigen::Index col = 1; col < 8; ++col) os << ',' << data.x(r, col);
      os << '\n';
    }
    if (!scale_out.empty()) {
      std::ofstream f(scale_out);
      if (!f) fail(ErrorCode::parse_error, "cannot write " + scale_out);
      f << std::setprecision(17) << "sigma_eps\n";
      for (Eigen::Index i = 0; i < data.true_scale.size(); ++i) f << data.true_scale.diag[i] << '\n';
    }
  }
};

// --- qq ------------------------------------------------------------------------

struct QqCmd {
  std::string fit_path, reference, out;
  double nu = 0.0;

  void add(CLI::App& app) {
    app.add_option("--fit", fit_path, "fit JSON")->required();
    app.add_option("--reference", reference, "normal or t (default: matches the model)")
        ->check(CLI::IsMember({"normal", "t"}));
    app.add_option("--nu", nu, "degrees of freedom for the t reference (default: fitted nu)");
    app.add_option("--out", out, "output CSV (default stdout)");
  }

  void run() const {
    const auto doc = load_fit(fit_path);
    std::string ref = reference;
    if (ref.empty()) ref = doc.fit.family == ModelFamily::tsar ? "t" : "normal";
    QqReference q = QqReference::normal();
    if (ref == "t") {
      const double v = nu > 0.0 ? nu : doc.fit.nu.value_or(0.0);
      if (!(v > 0.0)) fail(ErrorCode::domain_error, "t reference needs --nu for a SAR fit");
      q = QqReference::student(v);
    }
    std::ofstream file;
    output(out, file) << qq_csv(qq_pairs(doc.fit.std_residuals, q));
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spatial autoregressive models with Gaussian and Student-t errors"};
  app.require_subcommand(1);

  ProximityCmd proximity;
  FitCmd fit;
  SelectCmd select;
  PredictCmd predict;
  CrossvalCmd crossval;
  StudyCmd study;
  QqCmd qq;
  SimulateCmd simulate;

  proximity.add(*app.add_subcommand("proximity", "build a proximity matrix"));
  fit.add(*app.add_subcommand("fit", "fit a SAR or tSAR model"));
  select.add(*app.add_subcommand("select", "Box-Cox and backward stepwise selection"));
  predict.add(*app.add_subcommand("predict", "predict at new sites with intervals"));
  crossval.add(*app.add_subcommand("crossval", "k-fold interval coverage and calibration test"));
  study.add(*app.add_subcommand("study", "simulation study of the six estimators"));
  qq.add(*app.add_subcommand("qq", "quantile-quantile pairs of standardized residuals"));
  simulate.add(*app.add_subcommand("simulate", "simulate a tSAR dataset"));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (app.got_subcommand("proximity")) proximity.run();
    if (app.got_subcommand("fit")) fit.run();
    if (app.got_subcommand("select")) select.run();
    if (app.got_subcommand("predict")) predict.run();
    if (app.got_subcommand("crossval")) crossval.run();
    if (app.got_subcommand("study")) study.run();
    if (app.got_subcommand("qq")) qq.run();
    if (app.got_subcommand("simulate")) simulate.run();
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return is_numerical(e.code()) ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
