#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ccreid {

enum class ErrorCode {
  ZeroVector,
  DimensionMismatch,
  SupportViolation,
  NotScalarRoot,
  InvalidConfig,
  EmptyTemplateBank,
  SyntheticInput,
  IoError,
  FormatError,
  ShapeMismatch,
  NonFiniteGradient,
  InvalidParams,
  InvalidEps,
  Empty,
  UnknownCluster,
  EmptyCluster,
  EmptyBatch,
  WrongBatchSize,
  TooFewClusters,
  InvalidTemperature,
  MalformedGroup,
  NonFinite,
  NoValidMatch,
};

std::string_view to_string(ErrorCode code) noexcept;

// Every recoverable failure in the library is reported through this type; the
// code lets callers (and the CLI exit-code mapping) branch without parsing text.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace ccreid
