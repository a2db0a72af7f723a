#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace radeval {

/// Base class for every error raised by the engine.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A malformed input record. Carries the file, the 1-based line and the
/// offending field (empty when the whole line is unreadable).
class ParseError : public Error {
 public:
  ParseError(std::string file, std::size_t line, std::string field, const std::string& what);

  const std::string& file() const noexcept { return file_; }
  std::size_t line() const noexcept { return line_; }
  const std::string& field() const noexcept { return field_; }

 private:
  std::string file_;
  std::size_t line_;
  std::string field_;
};

/// Label names or schema identifiers that do not match the declared schema.
class SchemaError : public Error {
 public:
  using Error::Error;
};

/// Two records share a key that must be unique.
class DuplicateError : public Error {
 public:
  using Error::Error;
};

/// A statistic or score has no defined value for the given input
/// (zero denominators, degenerate embeddings, empty corpora).
class UndefinedError : public Error {
 public:
  using Error::Error;
};

}  // namespace radeval
