#pragma once

#include <stdexcept>
#include <string>

namespace cear {

enum class ErrorKind {
  EmptyDocument,
  NonMonotonicPages,
  InvalidText,
  VerificationFailed,
  MalformedStanza,
  CyclicIsA,
  UnknownDocument,
  SpanOutOfRange,
  SurfaceMismatch,
  MixedDocuments,
  MissingPlaceholder,
  TransportError,
  TooShort,
  BadConfig,
  IoError,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::EmptyDocument: return "EmptyDocument";
    case ErrorKind::NonMonotonicPages: return "NonMonotonicPages";
    case ErrorKind::InvalidText: return "InvalidText";
    case ErrorKind::VerificationFailed: return "VerificationFailed";
    case ErrorKind::MalformedStanza: return "MalformedStanza";
    case ErrorKind::CyclicIsA: return "CyclicIsA";
    case ErrorKind::UnknownDocument: return "UnknownDocument";
    case ErrorKind::SpanOutOfRange: return "SpanOutOfRange";
    case ErrorKind::SurfaceMismatch: return "SurfaceMismatch";
    case ErrorKind::MixedDocuments: return "MixedDocuments";
    case ErrorKind::MissingPlaceholder: return "MissingPlaceholder";
    case ErrorKind::TransportError: return "TransportError";
    case ErrorKind::TooShort: return "TooShort";
    case ErrorKind::BadConfig: return "BadConfig";
    case ErrorKind::IoError: return "IoError";
  }
  return "UnknownError";
}

/// Exception carrying a machine-checkable error kind next to the message.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message),
        kind_(kind),
        message_(message) {}

  ErrorKind kind() const { return kind_; }
  const std::string& message() const { return message_; }

 private:
  ErrorKind kind_;
  std::string message_;
};

}  // namespace cear
