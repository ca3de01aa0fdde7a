#pragma once

#include <stdexcept>
#include <string>

namespace ranslice {

enum class ErrorCode {
  InvalidGeometry,
  UncoveredZone,
  OutOfRangeDensity,
  ParseError,
  DimensionMismatch,
  UnstableQueue,
  ZeroVelocity,
  ConvergenceFailure,
  CapacityImpossible,
  EndOfTrace,
  EmptyTrace,
  UnstableParameters,
  ScaleGuard,
  ConfigError,
  CheckpointMismatch,
  NonFiniteParameter,
  IoError,
};

const char* to_string(ErrorCode code) noexcept;

// Every failure raised by the library carries a machine-readable code so the
// CLI can turn it into an error JSON without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace ranslice
