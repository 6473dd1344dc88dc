#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace tmw {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input text. Line and column are 1-based; 0 means unknown.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line, std::size_t column)
      : Error(what), line_(line), column_(column) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

// Well-formed text that does not match the expected document schema.
class SchemaError : public Error {
 public:
  using Error::Error;
};

class PreconditionError : public Error {
 public:
  using Error::Error;
};

class ExecutionFault : public Error {
 public:
  using Error::Error;
};

// An event definition or behavioral model refers to something that does not exist.
class DefinitionError : public Error {
 public:
  using Error::Error;
};

}  // namespace tmw
