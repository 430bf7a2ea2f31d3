#include "dgm/error.h"

namespace dgm {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::BadMagic:
      return "BadMagic";
    case ErrorCode::VersionUnsupported:
      return "VersionUnsupported";
    case ErrorCode::UnsupportedDtype:
      return "UnsupportedDtype";
    case ErrorCode::BadHeader:
      return "BadHeader";
    case ErrorCode::TruncatedPayload:
      return "TruncatedPayload";
    case ErrorCode::TrailingBytes:
      return "TrailingBytes";
    case ErrorCode::NonFiniteValue:
      return "NonFiniteValue";
    case ErrorCode::InvalidLabel:
      return "InvalidLabel";
    case ErrorCode::EmptySet:
      return "EmptySet";
    case ErrorCode::IoFailure:
      return "IoFailure";
    case ErrorCode::ParseError:
      return "ParseError";
    case ErrorCode::CountExceedsN:
      return "CountExceedsN";
    case ErrorCode::StratifiedWithoutLabels:
      return "StratifiedWithoutLabels";
    case ErrorCode::NonDivisibleCount:
      return "NonDivisibleCount";
    case ErrorCode::MissingLabels:
      return "MissingLabels";
    case ErrorCode::InvalidArgument:
      return "InvalidArgument";
    case ErrorCode::TooFewSamples:
      return "TooFewSamples";
    case ErrorCode::DimensionMismatch:
      return "DimensionMismatch";
    case ErrorCode::SignificantNegativeEigenvalue:
      return "SignificantNegativeEigenvalue";
    case ErrorCode::EigenFailure:
      return "EigenFailure";
    case ErrorCode::TooManyComponents:
      return "TooManyComponents";
    case ErrorCode::ZeroNormRow:
      return "ZeroNormRow";
    case ErrorCode::SupportMismatch:
      return "SupportMismatch";
    case ErrorCode::InvalidDistribution:
      return "InvalidDistribution";
    case ErrorCode::KTooLarge:
      return "KTooLarge";
    case ErrorCode::TooFewTrainRows:
      return "TooFewTrainRows";
    case ErrorCode::DegenerateNeighborhood:
      return "DegenerateNeighborhood";
    case ErrorCode::EmptyInput:
      return "EmptyInput";
    case ErrorCode::NoAdmissibleCells:
      return "NoAdmissibleCells";
    case ErrorCode::ConstantSeries:
      return "ConstantSeries";
    case ErrorCode::LengthMismatch:
      return "LengthMismatch";
    case ErrorCode::TooFewPoints:
      return "TooFewPoints";
    case ErrorCode::InsufficientOverlap:
      return "InsufficientOverlap";
    case ErrorCode::MissingRole:
      return "MissingRole";
  }
  return "Unknown";
}

}  // namespace dgm
