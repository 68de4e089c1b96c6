#include "resfluor/errors.hpp"

namespace resfluor {

std::string_view category_name(ErrorCategory category) {
  switch (category) {
    case ErrorCategory::Domain: return "domain";
    case ErrorCategory::Construction: return "construction";
    case ErrorCategory::Numerical: return "numerical";
    case ErrorCategory::Unsupported: return "unsupported";
    case ErrorCategory::Schema: return "schema";
    case ErrorCategory::Units: return "units";
    case ErrorCategory::Invariant: return "invariant";
    case ErrorCategory::Io: return "io";
  }
  return "unknown";
}

int exit_code(ErrorCategory category) {
  switch (category) {
    case ErrorCategory::Schema: return 2;
    case ErrorCategory::Units: return 3;
    case ErrorCategory::Invariant: return 4;
    case ErrorCategory::Domain: return 5;
    case ErrorCategory::Construction: return 6;
    case ErrorCategory::Numerical: return 7;
    case ErrorCategory::Unsupported: return 8;
    case ErrorCategory::Io: return 9;
  }
  return 1;
}

Error::Error(ErrorCategory category, const std::string& message)
    : std::runtime_error(std::string(category_name(category)) + " error: " + message),
      category_(category) {}

}  // namespace resfluor
