#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ceva {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed document interchange input. The message names the offending
// section/field path, e.g. "sections[2].paragraphs[0]".
class ParseError : public Error {
 public:
  using Error::Error;
};

// Malformed gazetteer or session file.
class LoadError : public Error {
 public:
  using Error::Error;
};

class ArgumentError : public Error {
 public:
  explicit ArgumentError(const std::string& message, std::string field = {})
      : Error(message), field_(std::move(field)) {}

  // Request field that failed validation; empty when not field-specific.
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

class NotFoundError : public Error {
 public:
  using Error::Error;
};

class CapacityError : public Error {
 public:
  using Error::Error;
};

class PersistenceError : public Error {
 public:
  using Error::Error;
};

// A backend replied, but the reply violates the wire contract (wrong
// dimension, non-unit vector, paraphrase equal to input, ...).
class ProtocolError : public Error {
 public:
  using Error::Error;
};

enum class BackendErrorCode { kUnreachable, kTimeout, kCapacity, kMalformed };

std::string_view to_string(BackendErrorCode code);
BackendErrorCode backend_error_code_from_string(std::string_view s);

class BackendError : public Error {
 public:
  BackendError(BackendErrorCode code, const std::string& message)
      : Error(message), code_(code) {}

  BackendErrorCode code() const noexcept { return code_; }
  bool retryable() const noexcept {
    return code_ == BackendErrorCode::kUnreachable ||
           code_ == BackendErrorCode::kTimeout;
  }

 private:
  BackendErrorCode code_;
};

}  // namespace ceva
