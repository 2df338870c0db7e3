#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ahlab {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A function was evaluated outside its domain (sqrt of a non-positive value,
/// division by a jet with zero constant term, singular metric, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Operands disagree on dimension, or an index is out of range.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Malformed expression or chart file. `offset` is a byte offset into the
/// parsed text; `line` is 1-based when known, 0 otherwise.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t offset, std::size_t line = 0)
      : Error(what), offset_(offset), line_(line) {}

  std::size_t offset() const noexcept { return offset_; }
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t offset_;
  std::size_t line_;
};

/// A geometric precondition failed: J is not almost complex, g is not
/// J-compatible, a declared symmetry is violated, a frame cannot be built.
class GeometryError : public Error {
 public:
  using Error::Error;
};

}  // namespace ahlab
