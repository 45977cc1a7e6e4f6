#include "treatfair/error.hpp"

namespace treatfair {

std::string_view to_string(errc code) {
  switch (code) {
    case errc::invalid_argument: return "InvalidArgument";
    case errc::non_invertible: return "NonInvertible";
    case errc::inconsistent: return "Inconsistent";
    case errc::plan_order_violation: return "PlanOrderViolation";
    case errc::empty_group: return "EmptyGroup";
    case errc::unknown_value: return "UnknownValue";
    case errc::underdetermined: return "Underdetermined";
    case errc::schema_mismatch: return "SchemaMismatch";
    case errc::unknown_column: return "UnknownColumn";
    case errc::role_missing: return "RoleMissing";
    case errc::non_numeric_cell: return "NonNumericCell";
    case errc::outcome_not_binary: return "OutcomeNotBinary";
    case errc::io_failure: return "IoFailure";
    case errc::missing_column: return "MissingColumn";
    case errc::negative_rate: return "NegativeRate";
    case errc::empty_policy: return "EmptyPolicy";
    case errc::degenerate: return "Degenerate";
  }
  return "Unknown";
}

error::error(errc code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

}  // namespace treatfair
