#include "tsar/diagnostics.hpp"

#include <algorithm>
#include <iomanip>
#include <sstream>

#include "tsar/distributions.hpp"
#include "tsar/errors.hpp"

namespace tsar {

std::vector<QqPair> qq_pairs(const Eigen::VectorXd& residuals, const QqReference& reference) {
  if (residuals.size() == 0) fail(ErrorCode::domain_error, "qq plot of no residuals");
  if (reference.kind == QqReference::Kind::t && !(reference.nu > 0.0)) {
    fail(ErrorCode::domain_error, "t reference needs nu > 0");
  }
  std::vector<double> sorted(residuals.data(), residuals.data() + residuals.size());
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  std::vector<QqPair> out(sorted.size());
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double p = (static_cast<double>(i) + 0.5) / n;
    out[i].theoretical = reference.kind == QqReference::Kind::t ? t_quantile(p, reference.nu)
                                                                : normal_quantile(p);
    out[i].empirical = sorted[i];
  }
  return out;
}

std::string qq_csv(const std::vector<QqPair>& pairs) {
  std::ostringstream out;
  out << std::setprecision(17) << "theoretical,empirical\n";
  for (const auto& p : pairs) out << p.theoretical << ',' << p.empirical << '\n';
  return out.str();
}

}  // namespace tsar
