// Copyright 2026 The edit-dialogue Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace edit {

enum class ErrorCode {
  EmptyContext,
  EmptyText,
  EmptyInput,
  DimensionMismatch,
  ZeroVector,
  MissingSlot,
  UnknownSlot,
  ProviderUnavailable,
  Timeout,
  BudgetExceeded,
  DuplicateDocId,
  EmptyIndex,
  GeneratorUnavailable,
  NoQuestionsProduced,
  MalformedRecord,
  UnknownSource,
  UnparseableJudgeOutput,
  InvalidArgument,
  NotFound,
  Io,
};

std::string_view to_string(ErrorCode code);

/// Base exception for every failure the library reports; `code()` carries
/// the machine-readable kind so callers can branch without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::EmptyContext: return "EmptyContext";
    case ErrorCode::EmptyText: return "EmptyText";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::ZeroVector: return "ZeroVector";
    case ErrorCode::MissingSlot: return "MissingSlot";
    case ErrorCode::UnknownSlot: return "UnknownSlot";
    case ErrorCode::ProviderUnavailable: return "ProviderUnavailable";
    case ErrorCode::Timeout: return "Timeout";
    case ErrorCode::BudgetExceeded: return "BudgetExceeded";
    case ErrorCode::DuplicateDocId: return "DuplicateDocId";
    case ErrorCode::EmptyIndex: return "EmptyIndex";
    case ErrorCode::GeneratorUnavailable: return "GeneratorUnavailable";
    case ErrorCode::NoQuestionsProduced: return "NoQuestionsProduced";
    case ErrorCode::MalformedRecord: return "MalformedRecord";
    case ErrorCode::UnknownSource: return "UnknownSource";
    case ErrorCode::UnparseableJudgeOutput: return "UnparseableJudgeOutput";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NotFound: return "NotFound";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace edit
