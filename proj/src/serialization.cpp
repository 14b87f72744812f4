#include "tsar/serialization.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "tsar/errors.hpp"

namespace tsar {

namespace {

[[noreturn]] void mismatch(const std::string& key, const std::string& why) {
  fail(ErrorCode::schema_mismatch, "key '" + key + "': " + why);
}

const Json& field(const Json& j, const std::string& key) {
  if (!j.is_object()) mismatch(key, "enclosing value is not an object");
  const auto it = j.find(key);
  if (it == j.end()) mismatch(key, "missing");
  return *it;
}

template <class T>
T get(const Json& j, const std::string& key) {
  const Json& v = field(j, key);
  try {
    return v.get<T>();
  } catch (const nlohmann::json::exception&) {
    mismatch(key, "unexpected type");
  }
}

template <class T>
std::optional<T> get_optional(const Json& j, const std::string& key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return get<T>(j, key);
}

void reject_unknown(const Json& j, const std::set<std::string>& known) {
  if (!j.is_object()) mismatch("<root>", "expected an object");
  for (const auto& [key, value] : j.items()) {
    if (!known.contains(key)) mismatch(key, "unknown key");
  }
}

Json vector_json(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

Eigen::VectorXd vector_from(const Json& j, const std::string& key) {
  const auto v = get<std::vector<double>>(j, key);
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

Json scheme_to_json(const ProximityScheme& scheme) {
  switch (scheme.kind) {
    case ProximityScheme::Kind::knn: return {{"kind", "knn"}, {"k", scheme.k}};
    case ProximityScheme::Kind::radius: return {{"kind", "radius"}, {"r_km", scheme.r_km}};
    case ProximityScheme::Kind::custom: break;
  }
  return {{"kind", "custom"}};
}

ProximityScheme scheme_from_json(const Json& j) {
  const auto kind = get<std::string>(j, "kind");
  if (kind == "knn") return ProximityScheme::knn(get<std::size_t>(j, "k"));
  if (kind == "radius") return ProximityScheme::radius(get<double>(j, "r_km"));
  if (kind == "custom") return {};
  mismatch("kind", "unknown scheme '" + kind + "'");
}

Json proximity_to_json(const ProximityMatrix& w) {
  Json entries = Json::array();
  for (const auto& t : w.entries()) entries.push_back(Json::array({t.row, t.col, t.weight}));
  return {{"n", w.size()},
          {"scheme", scheme_to_json(w.scheme())},
          {"row_standardized", w.row_standardized()},
          {"entries", std::move(entries)}};
}

ProximityMatrix proximity_from_json(const Json& j) {
  reject_unknown(j, {"n", "scheme", "row_standardized", "entries"});
  const auto n = get<std::size_t>(j, "n");
  const auto scheme = scheme_from_json(field(j, "scheme"));
  const auto standardized = get<bool>(j, "row_standardized");
  const Json& raw = field(j, "entries");
  if (!raw.is_array()) mismatch("entries", "expected an array");
  std::vector<Triplet> entries;
  entries.reserve(raw.size());
  for (const auto& e : raw) {
    if (!e.is_array() || e.size() != 3 || !e[0].is_number_unsigned() ||
        !e[1].is_number_unsigned() || !e[2].is_number()) {
      mismatch("entries", "each entry must be [i, j, w]");
    }
    entries.push_back({e[0].get<std::size_t>(), e[1].get<std::size_t>(), e[2].get<double>()});
  }
  return ProximityMatrix::from_entries(n, entries, standardized, scheme);
}

Json fit_to_json(const FitDocument& doc) {
  const auto& f = doc.fit;
  Json j;
  j["model"] = std::string(family_name(f.family));
  j["beta"] = vector_json(f.beta);
  j["lambda"] = f.lambda;
  j["sigma"] = f.sigma;
  if (f.family == ModelFamily::tsar) {
    j["nu"] = f.nu.value_or(0.0);
    j["nu_estimated"] = f.nu_estimated;
    if (f.nu_tolerance) j["nu_tolerance"] = *f.nu_tolerance;
  }
  j["s_hat"] = f.s_hat;
  j["loglik"] = f.loglik;
  j["lambda_tolerance"] = f.lambda_tolerance;
  j["se_beta"] = vector_json(f.se_beta);
  j["z"] = vector_json(f.z_scores);
  j["p"] = vector_json(f.p_values);
  j["warnings"] = f.warnings;
  j["fitted"] = vector_json(f.fitted);
  j["residuals"] = vector_json(f.residuals);
  j["std_residuals"] = vector_json(f.std_residuals);

  Json meta;
  meta["response"] = doc.meta.response;
  meta["covariates"] = doc.meta.covariates;
  meta["scheme"] = scheme_to_json(doc.meta.scheme);
  meta["sigma_eps"] = doc.meta.sigma_eps;
  meta["boxcox"] = doc.meta.boxcox ? Json{{"m", doc.meta.boxcox->m}, {"l", doc.meta.boxcox->l}}
                                   : Json(nullptr);
  meta["n"] = doc.meta.n;
  j["metadata"] = std::move(meta);
  return j;
}

FitDocument fit_from_json(const Json& j) {
  FitDocument doc;
  auto& f = doc.fit;
  const auto model = get<std::string>(j, "model");
  if (model == "sar") {
    f.family = ModelFamily::sar;
  } else if (model == "tsar") {
    f.family = ModelFamily::tsar;
  } else {
    mismatch("model", "expected 'sar' or 'tsar', got '" + model + "'");
  }
  std::set<std::string> known{"model",   "beta",     "lambda",      "sigma",     "s_hat",
                              "loglik",  "se_beta",  "z",           "p",         "warnings",
                              "fitted",  "residuals", "std_residuals", "metadata",
                              "lambda_tolerance"};
  if (f.family == ModelFamily::tsar) known.insert({"nu", "nu_estimated", "nu_tolerance"});
  reject_unknown(j, known);

  f.beta = vector_from(j, "beta");
  f.lambda = get<double>(j, "lambda");
  f.sigma = get<double>(j, "sigma");
  if (f.family == ModelFamily::tsar) {
    f.nu = get<double>(j, "nu");
    f.nu_estimated = get<bool>(j, "nu_estimated");
    f.nu_tolerance = get_optional<double>(j, "nu_tolerance");
  }
  f.s_hat = get<double>(j, "s_hat");
  f.loglik = get<double>(j, "loglik");
  f.lambda_tolerance = get<double>(j, "lambda_tolerance");
  f.se_beta = vector_from(j, "se_beta");
  f.z_scores = vector_from(j, "z");
  f.p_values = vector_from(j, "p");
  f.warnings = get<std::vector<std::string>>(j, "warnings");
  f.fitted = vector_from(j, "fitted");
  f.residuals = vector_from(j, "residuals");
  f.std_residuals = vector_from(j, "std_residuals");
  for (const auto* key : {"se_beta", "z", "p"}) {
    if (static_cast<Eigen::Index>(field(j, key).size()) != f.beta.size()) {
      mismatch(key, "length differs from beta");
    }
  }

  const Json& meta = field(j, "metadata");
  reject_unknown(meta, {"response", "covariates", "scheme", "sigma_eps", "boxcox", "n"});
  doc.meta.response = get<std::string>(meta, "response");
  doc.meta.covariates = get<std::vector<std::string>>(meta, "covariates");
  doc.meta.scheme = scheme_from_json(field(meta, "scheme"));
  doc.meta.sigma_eps = get<std::string>(meta, "sigma_eps");
  if (meta.contains("boxcox") && !meta.at("boxcox").is_null()) {
    const Json& b = meta.at("boxcox");
    doc.meta.boxcox = BoxCoxSpec{get<double>(b, "m"), get<double>(b, "l")};
  }
  doc.meta.n = get<std::size_t>(meta, "n");
  if (static_cast<Eigen::Index>(doc.meta.covariates.size()) + 1 != f.beta.size()) {
    mismatch("covariates", "count does not match beta");
  }
  return doc;
}

Json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::parse_error, "cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    fail(ErrorCode::parse_error, path.string() + ": " + e.what());
  }
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::parse_error, "cannot write " + path.string());
  out << text;
  if (!out) fail(ErrorCode::parse_error, "write to " + path.string() + " failed");
}

void save_fit(const std::filesystem::path& path, const FitDocument& doc) {
  write_text(path, fit_to_json(doc).dump(2) + "\n");
}

FitDocument load_fit(const std::filesystem::path& path) { return fit_from_json(read_json(path)); }

RunConfig run_config_from_json(const Json& j) {
  reject_unknown(j, {"response", "covariates", "model", "knn", "r_km", "sigma_eps",
                     "variance_floor", "boxcox_m", "boxcox_l", "l_grid", "select_alpha", "alphas",
                     "folds", "seed", "nu"});
  RunConfig c;
  c.response = get_optional<std::string>(j, "response");
  c.covariates = get_optional<std::vector<std::string>>(j, "covariates");
  c.model = get_optional<std::string>(j, "model");
  c.knn = get_optional<std::size_t>(j, "knn");
  c.r_km = get_optional<double>(j, "r_km");
  c.sigma_eps = get_optional<std::string>(j, "sigma_eps");
  c.variance_floor = get_optional<double>(j, "variance_floor");
  c.boxcox_m = get_optional<double>(j, "boxcox_m");
  c.boxcox_l = get_optional<double>(j, "boxcox_l");
  c.l_grid = get_optional<std::vector<double>>(j, "l_grid");
  c.select_alpha = get_optional<double>(j, "select_alpha");
  c.alphas = get_optional<std::vector<double>>(j, "alphas");
  c.folds = get_optional<std::size_t>(j, "folds");
  c.seed = get_optional<std::uint64_t>(j, "seed");
  c.nu = get_optional<double>(j, "nu");
  if (c.model && *c.model != "sar" && *c.model != "tsar") mismatch("model", "expected sar or tsar");
  if (c.knn && c.r_km) mismatch("r_km", "knn and r_km are mutually exclusive");
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  return run_config_from_json(read_json(path));
}

StudyConfig study_config_from_json(const Json& j) {
  reject_unknown(j, {"n", "k", "nu", "lambda", "beta", "replications", "seed", "threads", "window",
                     "region_scales"});
  StudyConfig c;
  if (auto v = get_optional<std::size_t>(j, "n")) c.n = *v;
  if (auto v = get_optional<std::size_t>(j, "k")) c.k = *v;
  if (auto v = get_optional<double>(j, "nu")) c.nu = *v;
  if (auto v = get_optional<double>(j, "lambda")) c.lambda = *v;
  if (auto v = get_optional<std::vector<double>>(j, "beta")) c.beta = *v;
  if (auto v = get_optional<std::size_t>(j, "replications")) c.replications = *v;
  if (auto v = get_optional<std::uint64_t>(j, "seed")) c.seed = *v;
  if (auto v = get_optional<std::size_t>(j, "threads")) c.threads = *v;
  if (j.contains("window")) {
    const Json& w = j.at("window");
    reject_unknown(w, {"lat_min", "lat_max", "lon_min", "lon_max"});
    if (auto v = get_optional<double>(w, "lat_min")) c.window.lat_min = *v;
    if (auto v = get_optional<double>(w, "lat_max")) c.window.lat_max = *v;
    if (auto v = get_optional<double>(w, "lon_min")) c.window.lon_min = *v;
    if (auto v = get_optional<double>(w, "lon_max")) c.window.lon_max = *v;
  }
  if (auto v = get_optional<std::vector<double>>(j, "region_scales")) {
    if (v->size() != 6) mismatch("region_scales", "expected 6 values");
    std::copy(v->begin(), v->end(), c.region_scales.begin());
  }
  return c;
}

StudyConfig load_study_config(const std::filesystem::path& path) {
  return study_config_from_json(read_json(path));
}

}  // namespace tsar
