#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace gnet {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An edge references a node that does not exist.
class StructuralError : public Error {
 public:
  using Error::Error;
};

/// A record violates a domain invariant (nonpositive asset, self-loop, ...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

class LookupError : public Error {
 public:
  using Error::Error;
};

/// Operation is undefined on the given input (empty graph, N < 2, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class GenerationError : public Error {
 public:
  using Error::Error;
};

/// Power-law fit failed; carries the number of tail samples that were available.
class FitError : public Error {
 public:
  FitError(const std::string& what, std::size_t tail_count)
      : Error(what), tail_count_(tail_count) {}
  std::size_t tail_count() const noexcept { return tail_count_; }

 private:
  std::size_t tail_count_;
};

/// Malformed input file. `line` is 1-based, 0 when the error is not tied to a row.
class FormatError : public Error {
 public:
  FormatError(const std::string& what, std::size_t line)
      : Error(line ? what + " (line " + std::to_string(line) + ")" : what),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace gnet
