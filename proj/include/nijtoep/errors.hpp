#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace nijtoep {

enum class ErrorKind {
  OrderMismatch,
  NonUnitDivisor,
  DomainViolation,
  Syntax,
  UnknownVariable,
  UnknownFunction,
  DimensionMismatch,
  ArityMismatch,
  RegularityViolation,
  InconsistentSystem,
  ClosednessViolation,
  SingularJacobian,
  Config,
  Precondition,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

// Parse error with the byte offset of the offending token.
class SyntaxError : public Error {
 public:
  SyntaxError(std::size_t offset, const std::string& message)
      : Error(ErrorKind::Syntax, message), offset_(offset) {}

  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

}  // namespace nijtoep
