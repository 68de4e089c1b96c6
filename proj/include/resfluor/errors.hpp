#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace resfluor {

/// Broad failure classes. The CLI maps each one to its own exit code.
enum class ErrorCategory {
  Domain,        // argument outside the function's domain (e.g. coincident atoms)
  Construction,  // inputs are individually fine but describe an invalid model
  Numerical,     // a solver failed to reach its tolerance
  Unsupported,   // operation not available on this path (e.g. defective generator)
  Schema,        // malformed configuration document
  Units,         // inconsistent unit specification
  Invariant,     // configuration violates a documented invariant
  Io,            // file system trouble
};

std::string_view category_name(ErrorCategory category);

/// Process exit code used by the CLI for a given category.
int exit_code(ErrorCategory category);

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& message);

  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

}  // namespace resfluor
