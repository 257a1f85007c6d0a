#include "pdna/error.hpp"

namespace pdna {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::MalformedRecord: return "MalformedRecord";
    case ErrorCode::UnknownVoteString: return "UnknownVoteString";
    case ErrorCode::DuplicateVote: return "DuplicateVote";
    case ErrorCode::UnknownGroup: return "UnknownGroup";
    case ErrorCode::EmptyAfterCleaning: return "EmptyAfterCleaning";
    case ErrorCode::ZeroVarianceColumn: return "ZeroVarianceColumn";
    case ErrorCode::KTooLarge: return "KTooLarge";
    case ErrorCode::RankDeficient: return "RankDeficient";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::ZeroMatrix: return "ZeroMatrix";
    case ErrorCode::DeflationExhausted: return "DeflationExhausted";
    case ErrorCode::BudgetExceeded: return "BudgetExceeded";
    case ErrorCode::GroupTooSmall: return "GroupTooSmall";
    case ErrorCode::SingularCovariance: return "SingularCovariance";
    case ErrorCode::InvalidPermutation: return "InvalidPermutation";
    case ErrorCode::OrderMismatch: return "OrderMismatch";
    case ErrorCode::VoterNotFound: return "VoterNotFound";
    case ErrorCode::InvalidParameter: return "InvalidParameter";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

std::string_view module_of(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::MalformedRecord:
    case ErrorCode::UnknownVoteString:
    case ErrorCode::DuplicateVote:
    case ErrorCode::UnknownGroup:
    case ErrorCode::EmptyAfterCleaning:
      return "ingest";
    case ErrorCode::ZeroVarianceColumn:
      return "preprocess";
    case ErrorCode::KTooLarge:
    case ErrorCode::RankDeficient:
    case ErrorCode::DimensionMismatch:
      return "pca";
    case ErrorCode::ZeroMatrix:
    case ErrorCode::DeflationExhausted:
    case ErrorCode::BudgetExceeded:
      return "spca";
    case ErrorCode::GroupTooSmall:
    case ErrorCode::SingularCovariance:
      return "gmm";
    case ErrorCode::InvalidPermutation:
    case ErrorCode::OrderMismatch:
      return "map";
    case ErrorCode::VoterNotFound:
      return "outliers";
    case ErrorCode::InvalidParameter:
      return "synth";
    case ErrorCode::IoError:
      return "io";
    case ErrorCode::InvalidArgument:
      return "args";
  }
  return "pdna";
}

ErrorCategory category_of(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::ZeroVarianceColumn:
    case ErrorCode::KTooLarge:
    case ErrorCode::RankDeficient:
    case ErrorCode::ZeroMatrix:
    case ErrorCode::DeflationExhausted:
    case ErrorCode::BudgetExceeded:
    case ErrorCode::GroupTooSmall:
    case ErrorCode::SingularCovariance:
      return ErrorCategory::Numerical;
    default:
      return ErrorCategory::Input;
  }
}

Error::Error(ErrorCode code, const std::string& detail)
    : std::runtime_error(std::string(module_of(code)) + ": " + std::string(to_string(code)) +
                         (detail.empty() ? std::string() : ": " + detail)),
      code_(code),
      detail_(detail) {}

}  // namespace pdna
