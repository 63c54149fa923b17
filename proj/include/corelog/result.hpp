#pragma once

#include <string>
#include <utility>
#include <variant>

namespace corelog {

enum class ErrorKind {
  DuplicateId,
  DanglingObjectRef,
  DanglingEventRef,
  ClassRuleViolation,
  CycleDetected,
  MalformedXml,
  MissingExtension,
  SchemaViolation,
  MalformedInput,
  MappingError,
  ReservedKeyCollision,
  InvalidLog,
  DecodeError,
  MalformedRecord,
  PreconditionViolated,
  IoError,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::DuplicateId: return "DuplicateId";
    case ErrorKind::DanglingObjectRef: return "DanglingObjectRef";
    case ErrorKind::DanglingEventRef: return "DanglingEventRef";
    case ErrorKind::ClassRuleViolation: return "ClassRuleViolation";
    case ErrorKind::CycleDetected: return "CycleDetected";
    case ErrorKind::MalformedXml: return "MalformedXml";
    case ErrorKind::MissingExtension: return "MissingExtension";
    case ErrorKind::SchemaViolation: return "SchemaViolation";
    case ErrorKind::MalformedInput: return "MalformedInput";
    case ErrorKind::MappingError: return "MappingError";
    case ErrorKind::ReservedKeyCollision: return "ReservedKeyCollision";
    case ErrorKind::InvalidLog: return "InvalidLog";
    case ErrorKind::DecodeError: return "DecodeError";
    case ErrorKind::MalformedRecord: return "MalformedRecord";
    case ErrorKind::PreconditionViolated: return "PreconditionViolated";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

/// Failure description carried by every fallible operation.
/// `subject` names the offending id, key, or path when there is one.
struct Error {
  ErrorKind kind{};
  std::string message;
  std::string subject;
};

/// Minimal expected-style carrier: holds either a T or an Error.
template <typename T>
class Result {
 public:
  Result(T value) : repr_(std::move(value)) {}
  Result(Error error) : repr_(std::move(error)) {}

  bool ok() const { return repr_.index() == 0; }
  explicit operator bool() const { return ok(); }

  T& value() { return std::get<0>(repr_); }
  const T& value() const { return std::get<0>(repr_); }
  const Error& error() const { return std::get<1>(repr_); }

 private:
  std::variant<T, Error> repr_;
};

struct Unit {};
using Status = Result<Unit>;

inline Status ok_status() { return Status(Unit{}); }

inline Status fail(ErrorKind kind, std::string message, std::string subject = {}) {
  return Status(Error{kind, std::move(message), std::move(subject)});
}

}  // namespace corelog
