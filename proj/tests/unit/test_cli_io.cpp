#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <sstream>

#include "tsar/dataset.hpp"
#include "tsar/diagnostics.hpp"
#include "tsar/distributions.hpp"
#include "tsar/errors.hpp"
#include "tsar/serialization.hpp"
#include "tsar/sim_study.hpp"
#include "tsar/tsar_core.hpp"

using namespace tsar;

namespace {

ErrorCode code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::domain_error;
}

SpatialDataset parse(const std::string& text) {
  std::istringstream in(text);
  return read_dataset(in);
}

}  // namespace

TEST_CASE("dataset parsing") {
  const auto d = parse("id,lat,lon,y,x1\na,10.5,-20,3.25,1\nb,11,-21,4,0\n");
  CHECK(d.size() == 2);
  CHECK(d.ids[1] == "b");
  CHECK(d.points[0].lat == 10.5);
  CHECK(d.points[1].lon == -21.0);
  CHECK(d.column_names == std::vector<std::string>{"y", "x1"});
  CHECK(d.column("y")[0] == 3.25);
  CHECK(d.has_column("x1"));
  CHECK_FALSE(d.has_column("x2"));
  CHECK(code_of([&] { d.column("x2"); }) == ErrorCode::missing_column);

  // column order is free, a BOM and CRLF are tolerated
  const auto e = parse("\xEF\xBB\xBFy,lon,id,lat\r\n1,2,p,3\r\n");
  CHECK(e.points[0].lat == 3.0);
  CHECK(e.points[0].lon == 2.0);

  CHECK(code_of([] { parse("id,lat,y\na,1,2\n"); }) == ErrorCode::missing_column);
  CHECK(code_of([] { parse("id,lat,lon,y\na,1,2\n"); }) == ErrorCode::parse_error);
  CHECK(code_of([] { parse("id,lat,lon,y\na,1,2,abc\n"); }) == ErrorCode::parse_error);
  CHECK(code_of([] { parse("id,lat,lon,y\na,1,2,nan\n"); }) == ErrorCode::non_finite_value);
  CHECK(code_of([] { parse("id,lat,lon,y,y\na,1,2,3,4\n"); }) == ErrorCode::parse_error);
  try {
    parse("id,lat,lon,y\na,1,2,3\nb,1,2,x\n");
  } catch (const Error& err) {
    CHECK(std::string(err.what()).find("line 3") != std::string::npos);
  }
}

TEST_CASE("proximity json round trip") {
  auto rng = make_rng(1, 0);
  const auto pts = sample_locations(40, Window{}, rng);
  for (const auto& scheme : {ProximityScheme::knn(5), ProximityScheme::radius(1500.0)}) {
    const auto w = build_proximity(pts, scheme);
    const auto back = proximity_from_json(Json::parse(proximity_to_json(w).dump()));
    CHECK(back.size() == w.size());
    CHECK(back.row_standardized());
    CHECK(back.entries() == w.entries());
    CHECK(back.scheme() == w.scheme());
  }
}

TEST_CASE("fit json round trip is exact") {
  auto rng = make_rng(2, 0);
  const auto pts = sample_locations(120, Window{}, rng);
  const SpatialWeights w(knn_proximity(pts, 10));
  Eigen::VectorXd beta(8);
  beta << 3, 10, 4, 5, 2, 8, 1, 3;
  const auto d = simulate_tsar(beta, 0.6, 4.0, pts, RegionPartition{}, w.op, rng);
  FitDocument doc;
  doc.fit = fit_tsar(d.y, d.x, w.op, d.true_scale);
  doc.meta.response = "y";
  doc.meta.covariates = {"x1", "x2", "x3", "x4", "x5", "x6", "x7"};
  doc.meta.scheme = ProximityScheme::knn(10);
  doc.meta.boxcox = BoxCoxSpec{10.0, 0.5};
  doc.meta.n = 120;
  const auto j = fit_to_json(doc);
  const auto back = fit_from_json(Json::parse(j.dump()));
  CHECK(back.fit.family == ModelFamily::tsar);
  CHECK(back.fit.lambda == doc.fit.lambda);
  CHECK(back.fit.sigma == doc.fit.sigma);
  CHECK(*back.fit.nu == *doc.fit.nu);
  CHECK(back.fit.loglik == doc.fit.loglik);
  CHECK(back.fit.beta == doc.fit.beta);
  CHECK(back.fit.residuals == doc.fit.residuals);
  CHECK(back.fit.p_values == doc.fit.p_values);
  CHECK(back.meta.covariates == doc.meta.covariates);
  CHECK(back.meta.boxcox->l == 0.5);
  CHECK(fit_to_json(back) == j);

  const auto path = std::filesystem::temp_directory_path() / "tsar_fit_roundtrip.json";
  save_fit(path, doc);
  CHECK(fit_to_json(load_fit(path)) == j);
  std::filesystem::remove(path);

  auto bad = j;
  bad["model"] = "gauss";
  CHECK(code_of([&] { fit_from_json(bad); }) == ErrorCode::schema_mismatch);
  bad = j;
  bad["extra"] = 1;
  CHECK(code_of([&] { fit_from_json(bad); }) == ErrorCode::schema_mismatch);
  bad = j;
  bad.erase("lambda");
  CHECK(code_of([&] { fit_from_json(bad); }) == ErrorCode::schema_mismatch);
}

TEST_CASE("configuration documents") {
  const auto r = run_config_from_json(Json::parse(R"({"response":"y","knn":8,"alphas":[0.1,0.05]})"));
  CHECK(*r.response == "y");
  CHECK(*r.knn == 8);
  CHECK(r.alphas->size() == 2);
  CHECK_FALSE(r.model.has_value());
  CHECK(code_of([] { run_config_from_json(Json::parse(R"({"knn_k":8})")); }) ==
        ErrorCode::schema_mismatch);

  const auto s = study_config_from_json(Json::parse(R"({"n":100,"replications":3,"window":{"lat_min":30}})"));
  CHECK(s.n == 100);
  CHECK(s.replications == 3);
  CHECK(s.window.lat_min == 30.0);
  CHECK(s.window.lat_max == 49.0);
  CHECK(s.nu == 4.0);
  CHECK(code_of([] { study_config_from_json(Json::parse(R"({"reps":3})")); }) ==
        ErrorCode::schema_mismatch);
}

TEST_CASE("quantile-quantile pairs") {
  Eigen::VectorXd one(1);
  one << 2.5;
  auto q = qq_pairs(one, QqReference::normal());
  REQUIRE(q.size() == 1);
  CHECK(q[0].theoretical == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(q[0].empirical == 2.5);

  // reference quantiles of the reference itself lie on the diagonal
  const int n = 99;
  Eigen::VectorXd ref(n);
  for (int i = 0; i < n; ++i) ref[i] = normal_quantile((n - i - 0.5) / n);
  q = qq_pairs(ref, QqReference::normal());
  for (const auto& p : q) CHECK(p.empirical == doctest::Approx(p.theoretical).epsilon(1e-12));

  // t_6 draws against the t_6 reference have slope close to one
  auto rng = make_rng(3, 0);
  std::normal_distribution<double> z;
  std::chi_squared_distribution<double> chi(6.0);
  Eigen::VectorXd draws(5000);
  for (auto& v : draws) v = z(rng) / std::sqrt(chi(rng) / 6.0);
  q = qq_pairs(draws, QqReference::student(6.0));
  double sxy = 0, sxx = 0;
  for (const auto& p : q) {
    sxy += p.theoretical * p.empirical;
    sxx += p.theoretical * p.theoretical;
  }
  CHECK(sxy / sxx > 0.9);
  CHECK(sxy / sxx < 1.1);
  for (std::size_t i = 1; i < q.size(); ++i) {
    CHECK(q[i].theoretical > q[i - 1].theoretical);
    CHECK(q[i].empirical >= q[i - 1].empirical);
  }

  const auto csv = qq_csv(qq_pairs(one, QqReference::normal()));
  CHECK(csv.rfind("theoretical,empirical\n", 0) == 0);
  CHECK_THROWS_AS(qq_pairs(Eigen::VectorXd(0), QqReference::normal()), Error);
}
