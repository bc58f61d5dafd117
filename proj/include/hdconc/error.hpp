#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace hdconc {

enum class ErrorCode {
  NotPSD,
  DimMismatch,
  NegativeX,
  DegenerateSummary,
  NonPositiveG,
  SingularGamma,
  SingularD,
  MissingGamma,
  MissingCertificate,
  NonPositiveInput,
  Overflow,
  NonPositiveEps,
  TooFewSamples,
  RankDeficient,
  Parse,
  Io,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NotPSD: return "NotPSD";
    case ErrorCode::DimMismatch: return "DimMismatch";
    case ErrorCode::NegativeX: return "NegativeX";
    case ErrorCode::DegenerateSummary: return "DegenerateSummary";
    case ErrorCode::NonPositiveG: return "NonPositiveG";
    case ErrorCode::SingularGamma: return "SingularGamma";
    case ErrorCode::SingularD: return "SingularD";
    case ErrorCode::MissingGamma: return "MissingGamma";
    case ErrorCode::MissingCertificate: return "MissingCertificate";
    case ErrorCode::NonPositiveInput: return "NonPositiveInput";
    case ErrorCode::Overflow: return "Overflow";
    case ErrorCode::NonPositiveEps: return "NonPositiveEps";
    case ErrorCode::TooFewSamples: return "TooFewSamples";
    case ErrorCode::RankDeficient: return "RankDeficient";
    case ErrorCode::Parse: return "Parse";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

// Every failure raised by the library carries a machine-readable code.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace hdconc
