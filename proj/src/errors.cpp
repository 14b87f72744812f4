#include "tsar/errors.hpp"

namespace tsar {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::duplicate_location: return "DuplicateLocation";
    case ErrorCode::k_out_of_range: return "KOutOfRange";
    case ErrorCode::isolated_location: return "IsolatedLocation";
    case ErrorCode::isolated_site: return "IsolatedSite";
    case ErrorCode::index_out_of_range: return "IndexOutOfRange";
    case ErrorCode::dimension_mismatch: return "DimensionMismatch";
    case ErrorCode::domain_error: return "DomainError";
    case ErrorCode::non_positive_sigma: return "NonPositiveSigma";
    case ErrorCode::non_positive_shifted_response: return "NonPositiveShiftedResponse";
    case ErrorCode::parse_error: return "ParseError";
    case ErrorCode::missing_column: return "MissingColumn";
    case ErrorCode::non_finite_value: return "NonFiniteValue";
    case ErrorCode::schema_mismatch: return "SchemaMismatch";
    case ErrorCode::neighborhood_too_small: return "NeighborhoodTooSmall";
    case ErrorCode::rank_deficient_design: return "RankDeficientDesign";
    case ErrorCode::singular_normal_equations: return "SingularNormalEquations";
    case ErrorCode::degenerate_variance: return "DegenerateVariance";
    case ErrorCode::optimizer_failure: return "OptimizerFailure";
  }
  return "Unknown";
}

bool is_numerical(ErrorCode code) {
  switch (code) {
    case ErrorCode::rank_deficient_design:
    case ErrorCode::singular_normal_equations:
    case ErrorCode::degenerate_variance:
    case ErrorCode::optimizer_failure:
      return true;
    default:
      return false;
  }
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(error_code_name(code)) + ": " + what), code_(code) {}

void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

}  // namespace tsar
