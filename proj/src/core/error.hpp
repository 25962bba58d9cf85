#pragma once

#include <stdexcept>
#include <string>

namespace qcrit {

enum class ErrorCode {
  InvalidArgument = 1,
  Parse,
  Validation,
  Singular,
  Unstable,
  NoPoles,
  FitDegenerate,
  NotPositive,
  TailTooFat,
  DegenerateKernel,
  StatisticsMismatch,
};

const char* to_string(ErrorCode code);

/// Single exception type for the core; the code selects the C API status.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::Parse: return "Parse";
    case ErrorCode::Validation: return "Validation";
    case ErrorCode::Singular: return "Singular";
    case ErrorCode::Unstable: return "Unstable";
    case ErrorCode::NoPoles: return "NoPoles";
    case ErrorCode::FitDegenerate: return "FitDegenerate";
    case ErrorCode::NotPositive: return "NotPositive";
    case ErrorCode::TailTooFat: return "TailTooFat";
    case ErrorCode::DegenerateKernel: return "DegenerateKernel";
    case ErrorCode::StatisticsMismatch: return "StatisticsMismatch";
  }
  return "Unknown";
}

}  // namespace qcrit
