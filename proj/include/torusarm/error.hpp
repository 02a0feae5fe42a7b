#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace torusarm {

enum class ErrorCode {
  InvalidArgument,
  Unreachable,
  DegeneratePointer,
  StartBlocked,
  InvalidScenario,
  RunFinished,
  Infeasible,
  ParseError,
  ValidationError,
  Io,
  NoScenario,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "invalid_argument";
    case ErrorCode::Unreachable: return "unreachable";
    case ErrorCode::DegeneratePointer: return "degenerate_pointer";
    case ErrorCode::StartBlocked: return "start_blocked";
    case ErrorCode::InvalidScenario: return "invalid_scenario";
    case ErrorCode::RunFinished: return "run_finished";
    case ErrorCode::Infeasible: return "infeasible";
    case ErrorCode::ParseError: return "parse_error";
    case ErrorCode::ValidationError: return "validation_error";
    case ErrorCode::Io: return "io_error";
    case ErrorCode::NoScenario: return "no_scenario";
  }
  return "unknown";
}

// Every recoverable failure in the library is reported with this type; the
// code lets front ends (CLI exit status, wire Error events) classify it.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace torusarm
