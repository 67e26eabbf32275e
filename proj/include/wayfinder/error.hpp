#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace wayfinder {

enum class ErrorCode {
  MalformedAction,
  OutOfRange,
  ParseError,
  ValidationError,
  InvalidElement,
  InvalidInput,
  StaleSnapshot,
  BranchLimit,
  DuplicateSibling,
  DepthLimit,
  Exhausted,
  VerifierExhausted,
  NoProposal,
  PlannerError,
  OracleError,
  Transport,
  AuthFailure,
  MalformedResponse,
  ManifestMismatch,
  ConfigError,
  IoError,
};

std::string_view to_string(ErrorCode code);

/// Base exception for every failure raised by the library. The code lets
/// callers branch without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Oracle failure tagged with the agent role that produced it.
class OracleError : public Error {
 public:
  OracleError(std::string role, ErrorCode cause, const std::string& message)
      : Error(ErrorCode::OracleError, role + " (" + std::string(to_string(cause)) + "): " + message),
        role_(std::move(role)),
        cause_(cause) {}

  const std::string& role() const noexcept { return role_; }
  ErrorCode cause() const noexcept { return cause_; }

 private:
  std::string role_;
  ErrorCode cause_;
};

}  // namespace wayfinder
