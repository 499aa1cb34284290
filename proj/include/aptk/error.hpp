#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace aptk {

enum class ErrorCode {
  EmptySet,
  SpanMismatch,
  MissingAtomValue,
  SpectrumMismatch,
  NonExactPhases,
  TailPresent,
  EvaluationFailure,
  NonIntegralBasis,
  NotEquivalentInput,
  BudgetExhausted,
  DegenerateInput,
  NotEquivalentFamily,
  SchemaError,
  DuplicateFrequency,
  NegativeModulus,
  InvalidArgument,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::EmptySet: return "EmptySet";
    case ErrorCode::SpanMismatch: return "SpanMismatch";
    case ErrorCode::MissingAtomValue: return "MissingAtomValue";
    case ErrorCode::SpectrumMismatch: return "SpectrumMismatch";
    case ErrorCode::NonExactPhases: return "NonExactPhases";
    case ErrorCode::TailPresent: return "TailPresent";
    case ErrorCode::EvaluationFailure: return "EvaluationFailure";
    case ErrorCode::NonIntegralBasis: return "NonIntegralBasis";
    case ErrorCode::NotEquivalentInput: return "NotEquivalentInput";
    case ErrorCode::BudgetExhausted: return "BudgetExhausted";
    case ErrorCode::DegenerateInput: return "DegenerateInput";
    case ErrorCode::NotEquivalentFamily: return "NotEquivalentFamily";
    case ErrorCode::SchemaError: return "SchemaError";
    case ErrorCode::DuplicateFrequency: return "DuplicateFrequency";
    case ErrorCode::NegativeModulus: return "NegativeModulus";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the codes above.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace aptk
