#pragma once

#include <stdexcept>
#include <string>

namespace netform {

/// Failure categories. The CLI maps each one onto a distinct exit code.
enum class ErrorCategory {
  Parse = 2,
  Config = 3,
  Capacity = 4,
  Numeric = 5,
  Identification = 6,
  Validation = 7,
  Tolerance = 8,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& what)
      : std::runtime_error(what), category_(category) {}

  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

struct ParseError : Error {
  explicit ParseError(const std::string& what) : Error(ErrorCategory::Parse, what) {}
};

struct ConfigError : Error {
  explicit ConfigError(const std::string& what) : Error(ErrorCategory::Config, what) {}
};

struct CapacityError : Error {
  explicit CapacityError(const std::string& what) : Error(ErrorCategory::Capacity, what) {}
};

struct NumericError : Error {
  explicit NumericError(const std::string& what) : Error(ErrorCategory::Numeric, what) {}
};

struct IdentificationError : Error {
  explicit IdentificationError(const std::string& what)
      : Error(ErrorCategory::Identification, what) {}
};

struct ValidationError : Error {
  explicit ValidationError(const std::string& what) : Error(ErrorCategory::Validation, what) {}
};

/// Too few simulated draws were accepted; the tolerance should be loosened.
struct ToleranceError : Error {
  explicit ToleranceError(const std::string& what) : Error(ErrorCategory::Tolerance, what) {}
};

}  // namespace netform
