#pragma once

#include <stdexcept>
#include <string>

namespace predlearn {

enum class ErrorCode {
  DuplicateId,
  UnknownUnit,
  LayerViolation,
  InvalidValue,
  InvalidParams,
  InsufficientCycles,
  NoBursts,
  AllZeroHypotheses,
  UnknownLabel,
  EmptyIntersection,
  ZeroWeightPredicate,
  ArityExceeded,
  DimensionMismatch,
  CapacityExceeded,
  AmbiguousTrace,
  ParseError,
  SchemaError,
  DanglingId,
  VersionError,
  IoError,
};

const char* to_string(ErrorCode code);

/// Single exception type for the library; the code tells callers (and the
/// CLI exit status) which contract was broken.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

  /// Input/validation failures as opposed to runtime failures.
  bool is_validation() const noexcept {
    switch (code_) {
      case ErrorCode::IoError:
      case ErrorCode::InsufficientCycles:
      case ErrorCode::NoBursts:
      case ErrorCode::AllZeroHypotheses:
      case ErrorCode::EmptyIntersection:
      case ErrorCode::AmbiguousTrace:
        return false;
      default:
        return true;
    }
  }

 private:
  ErrorCode code_;
};

}  // namespace predlearn
