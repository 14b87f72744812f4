#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace tsar {

enum class ErrorCode {
  // input validation
  duplicate_location,
  k_out_of_range,
  isolated_location,
  isolated_site,
  index_out_of_range,
  dimension_mismatch,
  domain_error,
  non_positive_sigma,
  non_positive_shifted_response,
  parse_error,
  missing_column,
  non_finite_value,
  schema_mismatch,
  neighborhood_too_small,
  // numerical failures
  rank_deficient_design,
  singular_normal_equations,
  degenerate_variance,
  optimizer_failure,
};

std::string_view error_code_name(ErrorCode code);

/// True for failures of the numerics rather than of the inputs.
bool is_numerical(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& what);

}  // namespace tsar
