#pragma once

#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace tsar {

struct QqReference {
  enum class Kind { normal, t };
  Kind kind = Kind::normal;
  double nu = 0.0;

  static QqReference normal() { return {}; }
  static QqReference student(double nu) { return {Kind::t, nu}; }
};

struct QqPair {
  double theoretical = 0.0;
  double empirical = 0.0;
};

/// Sorted residuals against reference quantiles at (i - 0.5) / n.
std::vector<QqPair> qq_pairs(const Eigen::VectorXd& residuals, const QqReference& reference);

std::string qq_csv(const std::vector<QqPair>& pairs);

}  // namespace tsar
