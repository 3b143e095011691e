#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace causal {

// Error taxonomy shared by the library and the CLI.  The CLI maps each
// category to a stable process exit code.
enum class ErrorCode {
  query = 2,                  // bad formula, bad query, binding failure
  model = 3,                  // model file or model invariant violation
  cap_exceeded = 4,           // enumeration space above the configured cap
  undefined_conditional = 5,  // conditioning event has probability zero
  io = 6,                     // file system / serialization failure
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string message)
      : std::runtime_error(std::move(message)), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

// Syntax error in the concrete formula grammar; `position` is the byte
// offset into the input text so callers can render a caret.
class ParseError : public Error {
 public:
  ParseError(std::string message, std::size_t position)
      : Error(ErrorCode::query, std::move(message)), position_(position) {}
  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

class QueryError : public Error {
 public:
  explicit QueryError(std::string message)
      : Error(ErrorCode::query, std::move(message)) {}
};

class ModelError : public Error {
 public:
  explicit ModelError(std::string message)
      : Error(ErrorCode::model, std::move(message)) {}
};

class CapExceeded : public Error {
 public:
  explicit CapExceeded(std::string message)
      : Error(ErrorCode::cap_exceeded, std::move(message)) {}
};

class UndefinedConditional : public Error {
 public:
  explicit UndefinedConditional(std::string message)
      : Error(ErrorCode::undefined_conditional, std::move(message)) {}
};

class IoError : public Error {
 public:
  explicit IoError(std::string message)
      : Error(ErrorCode::io, std::move(message)) {}
};

}  // namespace causal
