#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace llmnas {

enum class ErrorCode {
  // architecture grammar and spaces
  MalformedString,
  UnknownOp,
  WrongSourceIndex,
  IndexOutOfRange,
  VariantMismatch,
  UnsupportedSpace,
  // benchmark tables
  ParseError,
  DuplicateArch,
  IncompleteTable,
  MissingEntry,
  // search substrate
  BudgetExhausted,
  EmptyInput,
  InvalidConfig,
  // llm backends
  Timeout,
  HttpError,
  MalformedResponse,
  ScriptExhausted,
  EmptyStrategy,
  // ranking
  LengthMismatch,
  NotAPermutation,
  UnparseableRanking,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Coarse grouping used by the CLI to pick an exit code.
enum class ErrorCategory { Config, Data, Backend };

ErrorCategory category_of(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Backend failures additionally carry the HTTP status when one was received.
class BackendError : public Error {
 public:
  BackendError(ErrorCode code, const std::string& message, int status = 0)
      : Error(code, message), status_(status) {}

  int status() const noexcept { return status_; }

 private:
  int status_;
};

}  // namespace llmnas
