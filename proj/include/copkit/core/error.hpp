#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace copkit {

enum class ErrorCode {
  kInvalidArgument,
  kNoStepLabel,
  kIndexOutOfRange,
  kCannotShuffle,
  kDimensionMismatch,
  kZeroVector,
  kUnknownId,
  kParseError,
  kIoError,
  kTransportError,
  kProviderRefusal,
  kBudgetExceeded,
  kCacheIoError,
  kInsufficientPool,
  kUnparseableSelection,
  kUnparseableCurrentStep,
  kMissingEmbedding,
  kLengthMismatch,
  kUnparseableJudgeScore,
  kAllJudgesFailed,
  kDegenerateAgreement,
  kUnknownGroupKey,
  kJoinMismatch,
  kConfigError,
};

constexpr std::string_view error_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kNoStepLabel: return "NoStepLabel";
    case ErrorCode::kIndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::kCannotShuffle: return "CannotShuffle";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kZeroVector: return "ZeroVector";
    case ErrorCode::kUnknownId: return "UnknownId";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kIoError: return "IOError";
    case ErrorCode::kTransportError: return "TransportError";
    case ErrorCode::kProviderRefusal: return "ProviderRefusal";
    case ErrorCode::kBudgetExceeded: return "BudgetExceeded";
    case ErrorCode::kCacheIoError: return "CacheIOError";
    case ErrorCode::kInsufficientPool: return "InsufficientPool";
    case ErrorCode::kUnparseableSelection: return "UnparseableSelection";
    case ErrorCode::kUnparseableCurrentStep: return "UnparseableCurrentStep";
    case ErrorCode::kMissingEmbedding: return "MissingEmbedding";
    case ErrorCode::kLengthMismatch: return "LengthMismatch";
    case ErrorCode::kUnparseableJudgeScore: return "UnparseableJudgeScore";
    case ErrorCode::kAllJudgesFailed: return "AllJudgesFailed";
    case ErrorCode::kDegenerateAgreement: return "DegenerateAgreement";
    case ErrorCode::kUnknownGroupKey: return "UnknownGroupKey";
    case ErrorCode::kJoinMismatch: return "JoinMismatch";
    case ErrorCode::kConfigError: return "ConfigError";
  }
  return "Unknown";
}

/// Single exception type for the toolkit; the code carries the error class.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_name(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }
  std::string_view name() const noexcept { return error_name(code_); }

 private:
  ErrorCode code_;
};

// Errors caused by bad user input rather than a defect; the CLI maps them to exit code 2.
inline bool is_input_error(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kParseError:
    case ErrorCode::kIoError:
    case ErrorCode::kDimensionMismatch:
    case ErrorCode::kUnknownId:
    case ErrorCode::kMissingEmbedding:
    case ErrorCode::kUnknownGroupKey:
    case ErrorCode::kJoinMismatch:
    case ErrorCode::kConfigError:
    case ErrorCode::kLengthMismatch:
      return true;
    default:
      return false;
  }
}

}  // namespace copkit
