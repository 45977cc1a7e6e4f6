#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace treatfair {

enum class errc {
  invalid_argument,
  non_invertible,
  inconsistent,
  plan_order_violation,
  empty_group,
  unknown_value,
  underdetermined,
  schema_mismatch,
  unknown_column,
  role_missing,
  non_numeric_cell,
  outcome_not_binary,
  io_failure,
  missing_column,
  negative_rate,
  empty_policy,
  degenerate,
};

/// Stable CamelCase name used in machine-readable error output.
std::string_view to_string(errc code);

class error : public std::runtime_error {
 public:
  error(errc code, const std::string& message);

  errc code() const noexcept { return code_; }

 private:
  errc code_;
};

}  // namespace treatfair
