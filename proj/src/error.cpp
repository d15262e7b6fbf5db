#include "optograv/error.hpp"

namespace optograv {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NonPositiveInput: return "NonPositiveInput";
    case ErrorKind::FrequencyImaginary: return "FrequencyImaginary";
    case ErrorKind::TruncationInsufficient: return "TruncationInsufficient";
    case ErrorKind::DimensionTooLarge: return "DimensionTooLarge";
    case ErrorKind::StepTooSmall: return "StepTooSmall";
    case ErrorKind::QuadratureNotConverged: return "QuadratureNotConverged";
    case ErrorKind::ZeroInformation: return "ZeroInformation";
    case ErrorKind::GridResolutionInsufficient: return "GridResolutionInsufficient";
    case ErrorKind::MaximumOnBoundary: return "MaximumOnBoundary";
    case ErrorKind::FlatLikelihood: return "FlatLikelihood";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& what)
    : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

}  // namespace optograv
