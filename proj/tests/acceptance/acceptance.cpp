// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "oracles.hpp"
#include "tsar/boxcox_select.hpp"
#include "tsar/distributions.hpp"
#include "tsar/prediction.hpp"
#include "tsar/sar_core.hpp"
#include "tsar/sim_study.hpp"
#include "tsar/tsar_core.hpp"

using namespace tsar;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

Outcome gaussian_oracle() {
  std::mt19937_64 rng(101);
  double worst = 0.0;
  for (int rep = 0; rep < 50; ++rep) {
    const auto in = oracle::random_instance(1 + rep % 6, 1 + rep % 3, rng);
    const SpatialOperator op(in.w);
    const double got = sar_nll(in.y, in.x, in.beta, in.sigma, in.lambda, op, oracle::scale_of(in));
    worst = std::max(worst, std::abs(got - oracle::gaussian_nll(in)));
  }
  return {worst <= 1e-8, fmt("max abs error %.3g over 50 instances", worst)};
}

Outcome student_oracle() {
  std::mt19937_64 rng(102);
  std::uniform_real_distribution<double> nus(2.05, 40.0);
  double worst = 0.0;
  for (int rep = 0; rep < 50; ++rep) {
    const auto in = oracle::random_instance(1 + rep % 6, 1 + rep % 3, rng);
    const double nu = nus(rng);
    const SpatialOperator op(in.w);
    const double got =
        tsar_nll(in.y, in.x, in.beta, in.lambda, in.sigma, nu, op, oracle::scale_of(in));
    worst = std::max(worst, std::abs(got - oracle::student_nll(in, nu)));
  }
  return {worst <= 1e-8, fmt("max abs error %.3g over 50 instances", worst)};
}

Outcome gradient_check() {
  std::mt19937_64 rng(103);
  std::uniform_real_distribution<double> nus(2.5, 30.0);
  double worst = 0.0;
  for (int rep = 0; rep < 20; ++rep) {
    const auto in = oracle::random_instance(6, 3, rng);
    const SpatialOperator op(in.w);
    const auto scale = oracle::scale_of(in);
    const double nu = nus(rng);
    const Eigen::VectorXd g =
        tsar_beta_gradient(in.y, in.x, in.beta, in.lambda, in.sigma, nu, op, scale);
    for (Eigen::Index k = 0; k < g.size(); ++k) {
      const double h = 1e-5 * std::max(1.0, std::abs(in.beta[k]));
      Eigen::VectorXd bp = in.beta, bm = in.beta;
      bp[k] += h;
      bm[k] -= h;
      const double fd = (tsar_nll(in.y, in.x, bp, in.lambda, in.sigma, nu, op, scale) -
                         tsar_nll(in.y, in.x, bm, in.lambda, in.sigma, nu, op, scale)) /
                        (2 * h);
      worst = std::max(worst, std::abs(g[k] - fd) / std::max(1.0, std::abs(fd)));
    }
  }
  return {worst <= 1e-5, fmt("max relative error %.3g at 20 points", worst)};
}

Outcome gls_reduction() {
  std::mt19937_64 rng(104);
  double worst = 0.0;
  SarFitOptions opts;
  opts.fixed_lambda = 0.0;
  for (int rep = 0; rep < 20; ++rep) {
    const auto in = oracle::random_instance(8 + rep % 10, 1 + rep % 4, rng);
    const SpatialOperator op(in.w);
    const auto fit = fit_sar(in.y, in.x, op, ErrorScale::identity(in.y.size()), opts);
    const Eigen::VectorXd ols = in.x.householderQr().solve(in.y);
    worst = std::max(worst, (fit.beta - ols).cwiseAbs().maxCoeff());
  }
  return {worst <= 1e-8, fmt("max |beta - ols| %.3g over 20 instances", worst)};
}

StudyConfig table_config() {
  StudyConfig c;
  c.n = 250;
  c.k = 30;
  c.nu = 4.0;
  c.lambda = 0.8;
  c.replications = 50;
  c.seed = 1;
  return c;
}

const StudyResult& table_study() {
  static const StudyResult result = run_study(table_config());
  return result;
}

Outcome study_reproduction() {
  const auto& m6 = table_study().models[5];
  const bool ok = m6.mean_lambda >= 0.74 && m6.mean_lambda <= 0.82 && m6.mean_nu >= 3.5 &&
                  m6.mean_nu <= 8.0 && m6.mean_s >= 1.28 && m6.mean_s <= 1.52 &&
                  m6.rmse_beta <= 0.25;
  return {ok, fmt("model 6: mean lambda %.4f, mean nu %.3f, mean s %.4f, rmse(beta) %.4f; %zu/%zu "
                  "replications completed",
                  m6.mean_lambda, m6.mean_nu, m6.mean_s, m6.rmse_beta, table_study().completed,
                  table_config().replications)};
}

Outcome study_ordering() {
  const auto& m = table_study().models;
  const bool rmse_sar = m[4].rmse_beta <= m[2].rmse_beta && m[2].rmse_beta <= m[0].rmse_beta;
  const bool rmse_t = m[5].rmse_beta <= m[3].rmse_beta && m[3].rmse_beta <= m[1].rmse_beta;
  const bool ll = m[1].mean_ll >= m[0].mean_ll && m[3].mean_ll >= m[2].mean_ll &&
                  m[5].mean_ll >= m[4].mean_ll;
  return {rmse_sar && rmse_t && ll,
          fmt("rmse(beta) 5/3/1 = %.4f/%.4f/%.4f, 6/4/2 = %.4f/%.4f/%.4f; mean loglik tSAR-SAR = "
              "%.2f/%.2f/%.2f",
              m[4].rmse_beta, m[2].rmse_beta, m[0].rmse_beta, m[5].rmse_beta, m[3].rmse_beta,
              m[1].rmse_beta, m[1].mean_ll - m[0].mean_ll, m[3].mean_ll - m[2].mean_ll,
              m[5].mean_ll - m[4].mean_ll)};
}

Outcome moment_factor() {
  std::mt19937_64 rng(107);
  double worst = 0.0;
  for (int rep = 0; rep < 20; ++rep) {
    const auto in = oracle::random_instance(2 + rep % 5, 2, rng);
    const SpatialOperator op(in.w);
    const auto scale = oracle::scale_of(in);
    const double sar = sar_sigma2(in.y, in.x, in.beta, in.lambda, op, scale);
    const double t = tsar_sigma2(in.y, in.x, in.beta, in.lambda, 4.0, op, scale);
    worst = std::max(worst, std::abs(t - 0.5 * sar) / (0.5 * sar));
  }
  return {worst <= 1e-14, fmt("max relative deviation from half %.3g", worst)};
}

Outcome quantiles() {
  const double q1 = t_quantile(0.75, 1.0);
  const double qn = t_quantile(0.975, 1e6);
  double worst = 0.0;
  for (double nu : {3.0, 6.0, 20.0}) {
    for (int i = 1; i <= 999; ++i) {
      const double p = i / 1000.0;
      worst = std::max(worst, std::abs(t_cdf(t_quantile(p, nu), nu) - p));
    }
  }
  const bool ok = std::abs(q1 - 1.0) <= 1e-9 && std::abs(qn - 1.959964) <= 1e-3 && worst <= 1e-9;
  return {ok, fmt("q(0.75; 1) - 1 = %.3g, q(0.975; 1e6) = %.7f, max round-trip error %.3g",
                  q1 - 1.0, qn, worst)};
}

Outcome lrt_anchor() {
  const auto a = binomial_lrt(32, 1542, 0.01);
  const auto b = binomial_lrt(10, 1000, 0.01);
  const auto c = binomial_lrt(50, 1000, 0.05);
  const bool ok = a.p_value >= 0.0001 && a.p_value <= 0.0004 && b.statistic == 0.0 &&
                  b.p_value == 1.0 && c.statistic == 0.0 && c.p_value == 1.0;
  return {ok, fmt("p(32, 1542, 0.01) = %.6f; at k = alpha n: statistic %g, p %g", a.p_value,
                  b.statistic, b.p_value)};
}

struct CoverageSeed {
  double tsar = 0.0;
  double sar = 0.0;
};

CoverageSeed coverage_seed(std::uint64_t seed) {
  const StudyConfig c;
  auto rng = make_rng(seed, 0);
  const auto pts = sample_locations(1000, c.window, rng);
  const SpatialWeights w(knn_proximity(pts, c.k), LogDetMethod::lu);
  const Eigen::VectorXd beta = Eigen::Map<const Eigen::VectorXd>(c.beta.data(), 8);
  const auto d = simulate_tsar(beta, c.lambda, 4.0, pts, RegionPartition(c.window, c.region_scales),
                               w.op, rng);
  CrossValidationOptions o;
  o.seed = seed;
  o.alphas = {0.01};
  const auto r = cross_validate(pts, d.y, d.x, o);
  return {r.row(ModelFamily::tsar, 0.01).coverage, r.row(ModelFamily::sar, 0.01).coverage};
}

Outcome coverage_direction() {
  const std::size_t seeds = 20;
  std::vector<CoverageSeed> out(seeds);
  std::atomic<std::size_t> next{0};
  {
    std::vector<std::jthread> pool;
    const std::size_t threads = std::max(1u, std::thread::hardware_concurrency());
    for (std::size_t t = 0; t < std::min(threads, seeds); ++t) {
      pool.emplace_back([&] {
        for (std::size_t i; (i = next++) < seeds;) out[i] = coverage_seed(i + 1);
      });
    }
  }
  std::size_t in_range = 0, closer = 0;
  double lo = 1.0, mean_t = 0.0, mean_s = 0.0;
  for (const auto& s : out) {
    in_range += s.tsar >= 0.975 && s.tsar <= 1.0;
    closer += std::abs(s.tsar - 0.99) <= std::abs(s.sar - 0.99);
    lo = std::min(lo, s.tsar);
    mean_t += s.tsar / seeds;
    mean_s += s.sar / seeds;
  }
  return {in_range == seeds && closer >= 12,
          fmt("tSAR coverage in [0.975, 1] in %zu/20 seeds (min %.3f, mean %.4f; SAR mean %.4f); "
              "tSAR closer to 0.99 in %zu/20 seeds",
              in_range, lo, mean_t, mean_s, closer)};
}

Outcome stepwise_contract() {
  std::size_t all_signal = 0, all_significant = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    auto rng = make_rng(seed, 11);
    const auto pts = sample_locations(500, Window{}, rng);
    const SpatialWeights w(knn_proximity(pts, 10));
    std::normal_distribution<double> z;
    CovariatePool pool;
    pool.values.resize(500, 7);
    for (Eigen::Index c = 0; c < 7; ++c) {
      pool.names.push_back(c < 3 ? "signal" + std::to_string(c + 1) : "noise" + std::to_string(c - 2));
      for (Eigen::Index i = 0; i < 500; ++i) pool.values(i, c) = z(rng);
    }
    Eigen::VectorXd eps(500);
    for (auto& e : eps) e = z(rng);
    const Eigen::VectorXd mean = (40.0 + 1.0 * pool.values.col(0).array() +
                                  0.7 * pool.values.col(1).array() + 0.5 * pool.values.col(2).array())
                                     .matrix();
    const Eigen::VectorXd y = mean + w.op.solve(0.5, eps);
    const auto sel = stepwise_select(y, pool, w);
    std::size_t kept = 0;
    for (auto c : sel.covariates) kept += c < 3;
    all_signal += kept == 3;
    bool significant = true;
    for (Eigen::Index i = 1; i < sel.fit.p_values.size(); ++i) {
      significant = significant && sel.fit.p_values[i] <= 0.05;
    }
    all_significant += significant;
  }
  return {all_signal >= 16 && all_significant == 20,
          fmt("all signal retained in %zu/20 seeds; all retained significant in %zu/20 seeds",
              all_signal, all_significant)};
}

Outcome determinism() {
  StudyConfig c = table_config();
  c.replications = 12;
  c.seed = 77;
  c.threads = 1;
  const auto a = run_study(c);
  const auto b = run_study(c);
  c.threads = 0;
  const auto p = run_study(c);
  auto same = [](const StudyResult& x, const StudyResult& y) {
    if (x.replications.size() != y.replications.size() || x.failed != y.failed) return false;
    for (std::size_t r = 0; r < x.replications.size(); ++r) {
      const auto& u = x.replications[r];
      const auto& v = y.replications[r];
      for (std::size_t m = 0; m < kStudyModels; ++m) {
        if (u.beta[m] != v.beta[m] || u.lambda[m] != v.lambda[m] || u.s[m] != v.s[m] ||
            !(u.nu[m] == v.nu[m] || (std::isnan(u.nu[m]) && std::isnan(v.nu[m]))) ||
            u.loglik[m] != v.loglik[m]) {
          return false;
        }
      }
    }
    return study_csv(x) == study_csv(y);
  };
  const bool repeat = same(a, b);
  const bool parallel = same(a, p);
  return {repeat && parallel, fmt("repeat run identical: %s; serial vs parallel identical: %s",
                                  repeat ? "yes" : "no", parallel ? "yes" : "no")};
}

struct Criterion {
  int number;
  std::function<Outcome()> run;
  double budget_s;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, gaussian_oracle, 5},      {2, student_oracle, 5},      {3, gradient_check, 5},
      {4, gls_reduction, 60},       {5, study_reproduction, 600}, {6, study_ordering, 600},
      {7, moment_factor, 60},       {8, quantiles, 60},          {9, lrt_anchor, 60},
      {10, coverage_direction, 600}, {11, stepwise_contract, 600}, {12, determinism, 600},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs <= c.budget_s;
    const bool pass = o.pass && in_time;
    failures += !pass;
    std::printf("criterion %d: %s: %s (%.2f s%s)\n", c.number, pass ? "PASS" : "FAIL",
                o.detail.c_str(), secs, in_time ? "" : ", over the time budget");
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures,
              criteria.size());
  return failures == 0 ? 0 : 1;
}
