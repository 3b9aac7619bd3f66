#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace stableforms {

enum class ErrorKind {
  MixedBackend,
  DivisionByZero,
  JetOrderExceeded,
  ParseError,
  EvalError,
  NotPolynomial,
  DegreeOverflow,
  DegreeMismatch,
  ZeroVolume,
  NotStable,
  JacobiFailure,
  InconsistentParity,
  InvalidArgument,
};

inline const char* error_kind_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::MixedBackend: return "MixedBackend";
    case ErrorKind::DivisionByZero: return "DivisionByZero";
    case ErrorKind::JetOrderExceeded: return "JetOrderExceeded";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::EvalError: return "EvalError";
    case ErrorKind::NotPolynomial: return "NotPolynomial";
    case ErrorKind::DegreeOverflow: return "DegreeOverflow";
    case ErrorKind::DegreeMismatch: return "DegreeMismatch";
    case ErrorKind::ZeroVolume: return "ZeroVolume";
    case ErrorKind::NotStable: return "NotStable";
    case ErrorKind::JacobiFailure: return "JacobiFailure";
    case ErrorKind::InconsistentParity: return "InconsistentParity";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

/// Base exception for every failure raised by the library. The kind tag lets
/// callers (the CLI in particular) map failures onto exit codes without
/// string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(error_kind_name(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class ParseError : public Error {
 public:
  ParseError(std::size_t position, const std::string& message)
      : Error(ErrorKind::ParseError, message + " at position " + std::to_string(position)),
        position_(position) {}

  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

}  // namespace stableforms
