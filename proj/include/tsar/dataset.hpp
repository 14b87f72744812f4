#pragma once

// CSV ingestion of located observations: columns id, lat, lon plus any
// number of named numeric columns.

#include <filesystem>
#include <istream>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tsar/geo_proximity.hpp"

namespace tsar {

struct SpatialDataset {
  std::vector<std::string> ids;
  std::vector<GeoPoint> points;
  std::vector<std::string> column_names;  // numeric columns, file order
  Eigen::MatrixXd values;                 // size() x column_names.size()

  std::size_t size() const { return ids.size(); }
  bool has_column(const std::string& name) const;
  /// MissingColumn when absent.
  Eigen::VectorXd column(const std::string& name) const;
  Eigen::MatrixXd columns(std::span<const std::string> names) const;
};

/// ParseError (with line and column) on malformed rows or numbers,
/// MissingColumn when id, lat or lon is absent, NonFiniteValue for NaN or
/// infinite entries.
SpatialDataset read_dataset(std::istream& in);
SpatialDataset load_dataset(const std::filesystem::path& path);

}  // namespace tsar
