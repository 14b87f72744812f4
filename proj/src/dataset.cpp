#include "tsar/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>

#include "tsar/errors.hpp"

namespace tsar {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    out.push_back(trim(std::string_view(line).substr(start, comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

std::string where(std::size_t line, std::size_t column) {
  return "line " + std::to_string(line) + ", column " + std::to_string(column);
}

double parse_number(const std::string& field, std::size_t line, std::size_t column,
                    const std::string& name) {
  const std::string lowered = [&] {
    std::string s = field;
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    if (!s.empty() && (s[0] == '+' || s[0] == '-')) s.erase(0, 1);
    return s;
  }();
  if (lowered == "nan" || lowered == "inf" || lowered == "infinity") {
    fail(ErrorCode::non_finite_value,
         "non-finite value in column '" + name + "' at row " + std::to_string(line - 1) + " (" +
             where(line, column) + ")");
  }
  double v = 0.0;
  const char* first = field.data();
  const char* last = first + field.size();
  if (!field.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (field.empty() || ec != std::errc() || ptr != last) {
    fail(ErrorCode::parse_error, "cannot read '" + field + "' as a number at " + where(line, column));
  }
  if (!std::isfinite(v)) {
    fail(ErrorCode::non_finite_value, "non-finite value in column '" + name + "' at " +
                                          where(line, column));
  }
  return v;
}

}  // namespace

bool SpatialDataset::has_column(const std::string& name) const {
  return std::find(column_names.begin(), column_names.end(), name) != column_names.end();
}

Eigen::VectorXd SpatialDataset::column(const std::string& name) const {
  const auto it = std::find(column_names.begin(), column_names.end(), name);
  if (it == column_names.end()) fail(ErrorCode::missing_column, "no column '" + name + "'");
  return values.col(it - column_names.begin());
}

Eigen::MatrixXd SpatialDataset::columns(std::span<const std::string> names) const {
  Eigen::MatrixXd out(values.rows(), static_cast<Eigen::Index>(names.size()));
  for (std::size_t c = 0; c < names.size(); ++c) {
    out.col(static_cast<Eigen::Index>(c)) = column(names[c]);
  }
  return out;
}

SpatialDataset read_dataset(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) fail(ErrorCode::parse_error, "empty file (line 1)");
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  const auto header = split(line);

  std::optional<std::size_t> id_col, lat_col, lon_col;
  std::vector<std::size_t> numeric;
  SpatialDataset ds;
  for (std::size_t c = 0; c < header.size(); ++c) {
    const auto& h = header[c];
    if (h.empty()) fail(ErrorCode::parse_error, "empty header name at " + where(1, c + 1));
    if (std::count(header.begin(), header.end(), h) > 1) {
      fail(ErrorCode::parse_error, "duplicate header '" + h + "' at " + where(1, c + 1));
    }
    if (h == "id") {
      id_col = c;
    } else if (h == "lat") {
      lat_col = c;
    } else if (h == "lon") {
      lon_col = c;
    } else {
      numeric.push_back(c);
      ds.column_names.push_back(h);
    }
  }
  if (!id_col) fail(ErrorCode::missing_column, "required column 'id' is missing");
  if (!lat_col) fail(ErrorCode::missing_column, "required column 'lat' is missing");
  if (!lon_col) fail(ErrorCode::missing_column, "required column 'lon' is missing");

  std::vector<std::vector<double>> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split(line);
    if (fields.size() != header.size()) {
      fail(ErrorCode::parse_error, "expected " + std::to_string(header.size()) + " fields, got " +
                                       std::to_string(fields.size()) + " at " +
                                       where(line_no, std::min(fields.size(), header.size()) + 1));
    }
    ds.ids.push_back(fields[*id_col]);
    GeoPoint p{parse_number(fields[*lat_col], line_no, *lat_col + 1, "lat"),
               parse_number(fields[*lon_col], line_no, *lon_col + 1, "lon")};
    try {
      validate(p);
    } catch (const Error& e) {
      fail(ErrorCode::parse_error, std::string(e.what()) + " at line " + std::to_string(line_no));
    }
    ds.points.push_back(p);
    std::vector<double> row;
    row.reserve(numeric.size());
    for (auto c : numeric) row.push_back(parse_number(fields[c], line_no, c + 1, header[c]));
    rows.push_back(std::move(row));
  }

  ds.values.resize(static_cast<Eigen::Index>(rows.size()),
                   static_cast<Eigen::Index>(numeric.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < numeric.size(); ++c) {
      ds.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    }
  }
  return ds;
}

SpatialDataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::parse_error, "cannot open " + path.string());
  return read_dataset(in);
}

}  // namespace tsar
