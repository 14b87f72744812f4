#include "tsar/geo_proximity.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "tsar/errors.hpp"

namespace tsar {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

void check_points(std::span<const GeoPoint> points) {
  for (const auto& p : points) validate(p);
}

[[noreturn]] void duplicate(std::size_t i, std::size_t j) {
  fail(ErrorCode::duplicate_location,
       "locations " + std::to_string(i) + " and " + std::to_string(j) + " coincide");
}

}  // namespace

void validate(const GeoPoint& p) {
  if (!std::isfinite(p.lat) || !std::isfinite(p.lon) || p.lat < -90.0 || p.lat > 90.0 ||
      p.lon < -180.0 || p.lon > 180.0) {
    fail(ErrorCode::domain_error,
         "invalid coordinates (" + std::to_string(p.lat) + ", " + std::to_string(p.lon) + ")");
  }
}

double great_circle_distance(const GeoPoint& a, const GeoPoint& b) {
  const double phi1 = a.lat * kDegToRad;
  const double phi2 = b.lat * kDegToRad;
  const double dphi = (b.lat - a.lat) * kDegToRad;
  const double dlambda = (b.lon - a.lon) * kDegToRad;
  const double s1 = std::sin(dphi / 2.0);
  const double s2 = std::sin(dlambda / 2.0);
  double h = s1 * s1 + std::cos(phi1) * std::cos(phi2) * s2 * s2;
  h = std::clamp(h, 0.0, 1.0);
  return 2.0 * kEarthRadiusKm * std::asin(std::sqrt(h));
}

ProximityMatrix ProximityMatrix::from_entries(std::size_t n, std::span<const Triplet> entries,
                                              bool row_standardized, ProximityScheme scheme) {
  ProximityMatrix m;
  m.rows_.resize(n);
  m.row_standardized_ = row_standardized;
  m.scheme_ = scheme;
  for (const auto& t : entries) {
    if (t.row >= n || t.col >= n) {
      fail(ErrorCode::index_out_of_range,
           "entry (" + std::to_string(t.row) + ", " + std::to_string(t.col) + ") outside n = " +
               std::to_string(n));
    }
    if (t.row == t.col) {
      fail(ErrorCode::domain_error, "diagonal entry at " + std::to_string(t.row));
    }
    if (!std::isfinite(t.weight) || t.weight <= 0.0) {
      fail(ErrorCode::domain_error, "weights must be positive and finite");
    }
    m.rows_[t.row].push_back({t.col, t.weight});
  }
  for (std::size_t i = 0; i < n; ++i) {
    auto& row = m.rows_[i];
    std::sort(row.begin(), row.end(),
              [](const Neighbor& a, const Neighbor& b) { return a.index < b.index; });
    for (std::size_t e = 1; e < row.size(); ++e) {
      if (row[e].index == row[e - 1].index) {
        fail(ErrorCode::domain_error, "repeated entry in row " + std::to_string(i));
      }
    }
    if (row_standardized && !row.empty()) {
      double sum = 0.0;
      for (const auto& nb : row) sum += nb.weight;
      if (std::abs(sum - 1.0) > 1e-10) {
        fail(ErrorCode::domain_error, "row " + std::to_string(i) + " does not sum to 1");
      }
    }
  }
  return m;
}

std::span<const Neighbor> ProximityMatrix::row(std::size_t i) const {
  if (i >= rows_.size()) {
    fail(ErrorCode::index_out_of_range, "row " + std::to_string(i));
  }
  return rows_[i];
}

std::size_t ProximityMatrix::nonzeros() const {
  std::size_t nnz = 0;
  for (const auto& r : rows_) nnz += r.size();
  return nnz;
}

double ProximityMatrix::weight(std::size_t i, std::size_t j) const {
  const auto r = row(i);
  const auto it = std::lower_bound(r.begin(), r.end(), j,
                                   [](const Neighbor& nb, std::size_t c) { return nb.index < c; });
  return (it != r.end() && it->index == j) ? it->weight : 0.0;
}

std::vector<Triplet> ProximityMatrix::entries() const {
  std::vector<Triplet> out;
  out.reserve(nonzeros());
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    for (const auto& nb : rows_[i]) out.push_back({i, nb.index, nb.weight});
  }
  return out;
}

Eigen::SparseMatrix<double, Eigen::RowMajor> ProximityMatrix::to_sparse() const {
  const auto n = static_cast<Eigen::Index>(size());
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(nonzeros());
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    for (const auto& nb : rows_[i]) {
      trip.emplace_back(static_cast<int>(i), static_cast<int>(nb.index), nb.weight);
    }
  }
  Eigen::SparseMatrix<double, Eigen::RowMajor> s(n, n);
  s.setFromTriplets(trip.begin(), trip.end());
  s.makeCompressed();
  return s;
}

Eigen::MatrixXd ProximityMatrix::to_dense() const {
  const auto n = static_cast<Eigen::Index>(size());
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    for (const auto& nb : rows_[i]) {
      d(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(nb.index)) = nb.weight;
    }
  }
  return d;
}

ProximityMatrix knn_raw(std::span<const GeoPoint> points, std::size_t k) {
  check_points(points);
  const std::size_t n = points.size();
  if (k < 1 || n < 2 || k > n - 1) {
    fail(ErrorCode::k_out_of_range,
         "k = " + std::to_string(k) + " with n = " + std::to_string(n) + " locations");
  }
  std::vector<Triplet> entries;
  entries.reserve(n * k);
  std::vector<std::pair<double, std::size_t>> cand(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t c = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      cand[c++] = {great_circle_distance(points[i], points[j]), j};
    }
    // pair ordering breaks distance ties by ascending index
    std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(k), cand.end());
    for (std::size_t e = 0; e < k; ++e) {
      const auto [d, j] = cand[e];
      if (d == 0.0) duplicate(i, j);
      entries.push_back({i, j, 1.0 / d});
    }
  }
  return ProximityMatrix::from_entries(n, entries, false, ProximityScheme::knn(k));
}

ProximityMatrix knn_proximity(std::span<const GeoPoint> points, std::size_t k) {
  return row_standardize(knn_raw(points, k));
}

ProximityMatrix radius_raw(std::span<const GeoPoint> points, double r_km) {
  check_points(points);
  if (!(r_km > 0.0) || !std::isfinite(r_km)) {
    fail(ErrorCode::domain_error, "radius must be positive");
  }
  const std::size_t n = points.size();
  std::vector<Triplet> entries;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = great_circle_distance(points[i], points[j]);
      if (d > r_km) continue;
      if (d == 0.0) duplicate(i, j);
      entries.push_back({i, j, 1.0 / d});
      entries.push_back({j, i, 1.0 / d});
    }
  }
  return ProximityMatrix::from_entries(n, entries, false, ProximityScheme::radius(r_km));
}

ProximityMatrix radius_proximity(std::span<const GeoPoint> points, double r_km) {
  return row_standardize(radius_raw(points, r_km));
}

ProximityMatrix build_proximity(std::span<const GeoPoint> points, const ProximityScheme& scheme) {
  switch (scheme.kind) {
    case ProximityScheme::Kind::knn: return knn_proximity(points, scheme.k);
    case ProximityScheme::Kind::radius: return radius_proximity(points, scheme.r_km);
    case ProximityScheme::Kind::custom: break;
  }
  fail(ErrorCode::domain_error, "custom proximity schemes cannot be built from coordinates");
}

ProximityMatrix row_standardize(const ProximityMatrix& raw) {
  ProximityMatrix out;
  out.rows_.resize(raw.size());
  out.row_standardized_ = true;
  out.scheme_ = raw.scheme_;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const auto& src = raw.rows_[i];
    double sum = 0.0;
    for (const auto& nb : src) sum += nb.weight;
    if (src.empty() || !(sum > 0.0)) {
      fail(ErrorCode::isolated_location, "location " + std::to_string(i) + " has no neighbours");
    }
    auto& dst = out.rows_[i];
    dst.reserve(src.size());
    for (const auto& nb : src) dst.push_back({nb.index, nb.weight / sum});
  }
  return out;
}

std::vector<std::size_t> neighbors(const ProximityMatrix& w, std::size_t i) {
  std::vector<std::size_t> out;
  for (const auto& nb : w.row(i)) {
    if (nb.weight != 0.0) out.push_back(nb.index);
  }
  return out;
}

}  // namespace tsar
