#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace pdna {

enum class ErrorCode {
  // ingest
  MalformedRecord,
  UnknownVoteString,
  DuplicateVote,
  UnknownGroup,
  EmptyAfterCleaning,
  // preprocess
  ZeroVarianceColumn,
  // pca / spca
  KTooLarge,
  RankDeficient,
  DimensionMismatch,
  ZeroMatrix,
  DeflationExhausted,
  BudgetExceeded,
  // gmm
  GroupTooSmall,
  SingularCovariance,
  // map
  InvalidPermutation,
  OrderMismatch,
  // outliers
  VoterNotFound,
  // synth
  InvalidParameter,
  // any module: argument outside its documented domain
  InvalidArgument,
  // io
  IoError,
};

enum class ErrorCategory { Input, Numerical };

std::string_view to_string(ErrorCode code) noexcept;
std::string_view module_of(ErrorCode code) noexcept;
ErrorCategory category_of(ErrorCode code) noexcept;

/// Library exception. what() reads "<module>: <Code>: <detail>".
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail);

  ErrorCode code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }
  ErrorCategory category() const noexcept { return category_of(code_); }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace pdna
