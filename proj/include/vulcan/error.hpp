#pragma once

#include <stdexcept>
#include <string>

namespace vulcan {

/// Broad failure class, used by the CLI to choose an exit code.
enum class ErrorCategory {
  Usage,     // bad flags or configuration
  Data,      // malformed input files or programs
  Internal,  // broken invariant inside the pipeline
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& what)
      : std::runtime_error(what), category_(category) {}

  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

}  // namespace vulcan
