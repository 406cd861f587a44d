#include "llmnas/error.hpp"

namespace llmnas {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::MalformedString: return "MalformedString";
    case ErrorCode::UnknownOp: return "UnknownOp";
    case ErrorCode::WrongSourceIndex: return "WrongSourceIndex";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::VariantMismatch: return "VariantMismatch";
    case ErrorCode::UnsupportedSpace: return "UnsupportedSpace";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::DuplicateArch: return "DuplicateArch";
    case ErrorCode::IncompleteTable: return "IncompleteTable";
    case ErrorCode::MissingEntry: return "MissingEntry";
    case ErrorCode::BudgetExhausted: return "BudgetExhausted";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::Timeout: return "Timeout";
    case ErrorCode::HttpError: return "HttpError";
    case ErrorCode::MalformedResponse: return "MalformedResponse";
    case ErrorCode::ScriptExhausted: return "ScriptExhausted";
    case ErrorCode::EmptyStrategy: return "EmptyStrategy";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::NotAPermutation: return "NotAPermutation";
    case ErrorCode::UnparseableRanking: return "UnparseableRanking";
  }
  return "Unknown";
}

ErrorCategory category_of(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::ParseError:
    case ErrorCode::DuplicateArch:
    case ErrorCode::IncompleteTable:
    case ErrorCode::MissingEntry:
    case ErrorCode::MalformedString:
    case ErrorCode::UnknownOp:
    case ErrorCode::WrongSourceIndex:
      return ErrorCategory::Data;
    case ErrorCode::Timeout:
    case ErrorCode::HttpError:
    case ErrorCode::MalformedResponse:
    case ErrorCode::ScriptExhausted:
    case ErrorCode::EmptyStrategy:
      return ErrorCategory::Backend;
    default:
      return ErrorCategory::Config;
  }
}

}  // namespace llmnas
