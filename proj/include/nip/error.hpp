#ifndef NIP_ERROR_HPP
#define NIP_ERROR_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace nip {

enum class ErrorCode {
  DimensionMismatch,
  ZeroNormal,
  NonFinite,
  InvalidArgument,
  InfeasiblePolyhedron,
  NoFeasibleSampleFound,
  SublevelEmpty,
  NotAvailable,
  InsufficientData,
  ZeroSubgradient,
  InfeasibleCuts,
  NumericalFailure,
  ParseError,
};

inline std::string_view to_string(ErrorCode code)
{
  switch (code) {
  case ErrorCode::DimensionMismatch: return "DimensionMismatch";
  case ErrorCode::ZeroNormal: return "ZeroNormal";
  case ErrorCode::NonFinite: return "NonFinite";
  case ErrorCode::InvalidArgument: return "InvalidArgument";
  case ErrorCode::InfeasiblePolyhedron: return "InfeasiblePolyhedron";
  case ErrorCode::NoFeasibleSampleFound: return "NoFeasibleSampleFound";
  case ErrorCode::SublevelEmpty: return "SublevelEmpty";
  case ErrorCode::NotAvailable: return "NotAvailable";
  case ErrorCode::InsufficientData: return "InsufficientData";
  case ErrorCode::ZeroSubgradient: return "ZeroSubgradient";
  case ErrorCode::InfeasibleCuts: return "InfeasibleCuts";
  case ErrorCode::NumericalFailure: return "NumericalFailure";
  case ErrorCode::ParseError: return "ParseError";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the codes above.
class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code)
  {
  }

  ErrorCode code() const noexcept { return code_; }

private:
  ErrorCode code_;
};

} // namespace nip

#endif // NIP_ERROR_HPP
