#pragma once

// Great-circle distances and inverse-distance proximity matrices.

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace tsar {

inline constexpr double kEarthRadiusKm = 6371.0088;

struct GeoPoint {
  double lat = 0.0;  // degrees, [-90, 90]
  double lon = 0.0;  // degrees, [-180, 180]

  friend bool operator==(const GeoPoint&, const GeoPoint&) = default;
};

/// Throws DomainError for non-finite or out-of-range coordinates.
void validate(const GeoPoint& p);

/// Haversine distance in km.
double great_circle_distance(const GeoPoint& a, const GeoPoint& b);

struct Neighbor {
  std::size_t index = 0;
  double weight = 0.0;

  friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

struct ProximityScheme {
  enum class Kind { knn, radius, custom };
  Kind kind = Kind::custom;
  std::size_t k = 0;
  double r_km = 0.0;

  static ProximityScheme knn(std::size_t k) { return {Kind::knn, k, 0.0}; }
  static ProximityScheme radius(double r_km) { return {Kind::radius, 0, r_km}; }

  friend bool operator==(const ProximityScheme&, const ProximityScheme&) = default;
};

struct Triplet {
  std::size_t row = 0;
  std::size_t col = 0;
  double weight = 0.0;

  friend bool operator==(const Triplet&, const Triplet&) = default;
};

/// Sparse nonnegative n x n matrix with an empty diagonal. Rows are stored as
/// adjacency lists sorted by column index. Immutable once built.
class ProximityMatrix {
 public:
  ProximityMatrix() = default;

  /// Validates the entries: in-range indices, no diagonal, strictly positive
  /// finite weights, no repeated (i, j). With `row_standardized` set, rows
  /// must already sum to one.
  static ProximityMatrix from_entries(std::size_t n, std::span<const Triplet> entries,
                                      bool row_standardized,
                                      ProximityScheme scheme = {});

  std::size_t size() const { return rows_.size(); }
  std::span<const Neighbor> row(std::size_t i) const;
  bool row_standardized() const { return row_standardized_; }
  const ProximityScheme& scheme() const { return scheme_; }
  std::size_t nonzeros() const;

  /// Weight w_ij, zero when absent.
  double weight(std::size_t i, std::size_t j) const;

  std::vector<Triplet> entries() const;
  Eigen::SparseMatrix<double, Eigen::RowMajor> to_sparse() const;
  Eigen::MatrixXd to_dense() const;

 private:
  std::vector<std::vector<Neighbor>> rows_;
  bool row_standardized_ = false;
  ProximityScheme scheme_;

  friend ProximityMatrix row_standardize(const ProximityMatrix& raw);
};

/// Raw inverse-distance k-nearest-neighbour matrix. Ties at the k-th distance
/// go to the lower location index.
ProximityMatrix knn_raw(std::span<const GeoPoint> points, std::size_t k);
ProximityMatrix knn_proximity(std::span<const GeoPoint> points, std::size_t k);

/// Raw inverse-distance matrix over all pairs with d_ij <= r_km. Symmetric.
ProximityMatrix radius_raw(std::span<const GeoPoint> points, double r_km);
ProximityMatrix radius_proximity(std::span<const GeoPoint> points, double r_km);

ProximityMatrix build_proximity(std::span<const GeoPoint> points, const ProximityScheme& scheme);

/// w_ij / sum_j w_ij. Throws IsolatedLocation on an empty row.
ProximityMatrix row_standardize(const ProximityMatrix& raw);

/// N_i = {j : w_ij != 0}, ascending.
std::vector<std::size_t> neighbors(const ProximityMatrix& w, std::size_t i);

}  // namespace tsar
