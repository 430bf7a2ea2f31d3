#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace dgm {

enum class ErrorCode {
  // embedding_store
  BadMagic,
  VersionUnsupported,
  UnsupportedDtype,
  BadHeader,
  TruncatedPayload,
  TrailingBytes,
  NonFiniteValue,
  InvalidLabel,
  EmptySet,
  IoFailure,
  ParseError,
  CountExceedsN,
  StratifiedWithoutLabels,
  NonDivisibleCount,
  MissingLabels,
  // shared numerics
  InvalidArgument,
  TooFewSamples,
  DimensionMismatch,
  SignificantNegativeEigenvalue,
  EigenFailure,
  TooManyComponents,
  // kernel metrics
  ZeroNormRow,
  SupportMismatch,
  InvalidDistribution,
  // neighborhood metrics
  KTooLarge,
  // memorization
  TooFewTrainRows,
  DegenerateNeighborhood,
  EmptyInput,
  NoAdmissibleCells,
  // analysis
  ConstantSeries,
  LengthMismatch,
  TooFewPoints,
  InsufficientOverlap,
  // cli
  MissingRole,
};

std::string_view to_string(ErrorCode code);

/// Every failure in the library surfaces as a dgm::Error carrying a stable code.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) { throw Error(code, message); }

inline void require(bool condition, ErrorCode code, const std::string& message) {
  if (!condition) fail(code, message);
}

}  // namespace dgm
