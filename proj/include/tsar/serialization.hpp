#pragma once

// JSON documents for proximity matrices, fitted models and run/study
// configuration.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tsar/boxcox_select.hpp"
#include "tsar/geo_proximity.hpp"
#include "tsar/sar_core.hpp"
#include "tsar/sim_study.hpp"

namespace tsar {

using Json = nlohmann::json;

Json scheme_to_json(const ProximityScheme& scheme);
ProximityScheme scheme_from_json(const Json& j);

/// {n, scheme, row_standardized, entries: [[i, j, w], ...]}
Json proximity_to_json(const ProximityMatrix& w);
ProximityMatrix proximity_from_json(const Json& j);

/// What a fitted model was fitted on; needed to predict from it.
struct FitMetadata {
  std::string response;
  std::vector<std::string> covariates;  // intercept implied
  ProximityScheme scheme;
  std::string sigma_eps = "local-regression";
  std::optional<BoxCoxSpec> boxcox;
  std::size_t n = 0;
};

struct FitDocument {
  FitArtifact fit;
  FitMetadata meta;
};

Json fit_to_json(const FitDocument& doc);
/// SchemaMismatch naming the offending key.
FitDocument fit_from_json(const Json& j);

void save_fit(const std::filesystem::path& path, const FitDocument& doc);
FitDocument load_fit(const std::filesystem::path& path);

/// Options shared by fit, select, predict and crossval. Every key is
/// optional; unknown keys raise SchemaMismatch.
struct RunConfig {
  std::optional<std::string> response;
  std::optional<std::vector<std::string>> covariates;
  std::optional<std::string> model;  // "sar" | "tsar"
  std::optional<std::size_t> knn;
  std::optional<double> r_km;
  std::optional<std::string> sigma_eps;  // identity | local-regression | file:PATH
  std::optional<double> variance_floor;
  std::optional<double> boxcox_m;
  std::optional<double> boxcox_l;
  std::optional<std::vector<double>> l_grid;
  std::optional<double> select_alpha;
  std::optional<std::vector<double>> alphas;
  std::optional<std::size_t> folds;
  std::optional<std::uint64_t> seed;
  std::optional<double> nu;  // fixed nu for tSAR
};

RunConfig run_config_from_json(const Json& j);
RunConfig load_run_config(const std::filesystem::path& path);

/// Keys: n, k, nu, lambda, beta, replications, seed, threads, window
/// {lat_min, lat_max, lon_min, lon_max}, region_scales. Unknown keys raise
/// SchemaMismatch; absent keys keep the defaults.
StudyConfig study_config_from_json(const Json& j);
StudyConfig load_study_config(const std::filesystem::path& path);

Json read_json(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace tsar
