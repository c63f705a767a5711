#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace capchan {

enum class ErrorCode {
  InvalidParams,
  ToleranceNotMet,
  UnreachableAngle,
  NoEvent,
  NotPeriodic,
  WrongRegime,
  NoSignChange,
  NoRoot,
  BracketOverflow,
  OutOfDomain,
  UnknownBound,
  ParseError,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidParams: return "InvalidParams";
    case ErrorCode::ToleranceNotMet: return "ToleranceNotMet";
    case ErrorCode::UnreachableAngle: return "UnreachableAngle";
    case ErrorCode::NoEvent: return "NoEvent";
    case ErrorCode::NotPeriodic: return "NotPeriodic";
    case ErrorCode::WrongRegime: return "WrongRegime";
    case ErrorCode::NoSignChange: return "NoSignChange";
    case ErrorCode::NoRoot: return "NoRoot";
    case ErrorCode::BracketOverflow: return "BracketOverflow";
    case ErrorCode::OutOfDomain: return "OutOfDomain";
    case ErrorCode::UnknownBound: return "UnknownBound";
    case ErrorCode::ParseError: return "ParseError";
  }
  return "Unknown";
}

/// Every failure in the library is reported through this exception; `code()`
/// tells callers (and the CLI exit-code mapping) which contract was broken.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  [[nodiscard]] ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

}  // namespace capchan
