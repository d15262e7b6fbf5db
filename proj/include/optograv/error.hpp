#pragma once

#include <stdexcept>
#include <string>

namespace optograv {

enum class ErrorKind {
  NonPositiveInput,
  FrequencyImaginary,
  TruncationInsufficient,
  DimensionTooLarge,
  StepTooSmall,
  QuadratureNotConverged,
  ZeroInformation,
  GridResolutionInsufficient,
  MaximumOnBoundary,
  FlatLikelihood,
  InvalidArgument,
  ConfigError,
};

const char* to_string(ErrorKind kind);

/// Every failure raised by the library carries one of the kinds above so
/// callers (the CLI in particular) can map it to an exit code.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what);
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace optograv
