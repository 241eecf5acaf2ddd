#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace autoen {

enum class ErrorCode {
  InvalidArgument,
  IoError,
  ParseError,
  // dataset
  UnknownColumnKind,
  LabelColumnMissing,
  SingleClassDataset,
  RowLengthMismatch,
  NonNumericCellInNumericColumn,
  ClassTooSmall,
  KTooLarge,
  // preprocess
  ChainOrderInvalid,
  EmptyOutput,
  ArityMismatch,
  UnknownColumn,
  // learners
  DegenerateInput,
  NonFiniteFeature,
  BudgetExceeded,
  // pipeline
  UnknownStep,
  UnknownClassifier,
  DuplicateId,
  EmptyPortfolio,
  PipelineFailed,
  // ensemble
  AllPipelinesFailed,
  EmptyCandidateSet,
  AllPipelinesFiltered,
  // metrics
  SingleClassPresent,
  ShapeMismatch,
  // bench / persistence
  IncompleteResults,
  FormatVersion,
};

inline std::string_view code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::UnknownColumnKind: return "UnknownColumnKind";
    case ErrorCode::LabelColumnMissing: return "LabelColumnMissing";
    case ErrorCode::SingleClassDataset: return "SingleClassDataset";
    case ErrorCode::RowLengthMismatch: return "RowLengthMismatch";
    case ErrorCode::NonNumericCellInNumericColumn: return "NonNumericCellInNumericColumn";
    case ErrorCode::ClassTooSmall: return "ClassTooSmall";
    case ErrorCode::KTooLarge: return "KTooLarge";
    case ErrorCode::ChainOrderInvalid: return "ChainOrderInvalid";
    case ErrorCode::EmptyOutput: return "EmptyOutput";
    case ErrorCode::ArityMismatch: return "ArityMismatch";
    case ErrorCode::UnknownColumn: return "UnknownColumn";
    case ErrorCode::DegenerateInput: return "DegenerateInput";
    case ErrorCode::NonFiniteFeature: return "NonFiniteFeature";
    case ErrorCode::BudgetExceeded: return "BudgetExceeded";
    case ErrorCode::UnknownStep: return "UnknownStep";
    case ErrorCode::UnknownClassifier: return "UnknownClassifier";
    case ErrorCode::DuplicateId: return "DuplicateId";
    case ErrorCode::EmptyPortfolio: return "EmptyPortfolio";
    case ErrorCode::PipelineFailed: return "PipelineFailed";
    case ErrorCode::AllPipelinesFailed: return "AllPipelinesFailed";
    case ErrorCode::EmptyCandidateSet: return "EmptyCandidateSet";
    case ErrorCode::AllPipelinesFiltered: return "AllPipelinesFiltered";
    case ErrorCode::SingleClassPresent: return "SingleClassPresent";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::IncompleteResults: return "IncompleteResults";
    case ErrorCode::FormatVersion: return "FormatVersion";
  }
  return "Unknown";
}

/// Every failure surfaced by the library carries a stable code so callers
/// (and the CLI's machine-readable error line) can branch on it.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(code_name(code)) + ": " + message), code_(code), detail_(message) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) { throw Error(code, message); }

inline void require(bool condition, ErrorCode code, const std::string& message) {
  if (!condition) fail(code, message);
}

}  // namespace autoen
