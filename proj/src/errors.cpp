#include "ranslice/errors.hpp"

namespace ranslice {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidGeometry: return "InvalidGeometry";
    case ErrorCode::UncoveredZone: return "UncoveredZone";
    case ErrorCode::OutOfRangeDensity: return "OutOfRangeDensity";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::UnstableQueue: return "UnstableQueue";
    case ErrorCode::ZeroVelocity: return "ZeroVelocity";
    case ErrorCode::ConvergenceFailure: return "ConvergenceFailure";
    case ErrorCode::CapacityImpossible: return "CapacityImpossible";
    case ErrorCode::EndOfTrace: return "EndOfTrace";
    case ErrorCode::EmptyTrace: return "EmptyTrace";
    case ErrorCode::UnstableParameters: return "UnstableParameters";
    case ErrorCode::ScaleGuard: return "ScaleGuard";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::CheckpointMismatch: return "CheckpointMismatch";
    case ErrorCode::NonFiniteParameter: return "NonFiniteParameter";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace ranslice
