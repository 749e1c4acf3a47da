#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace maga {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shapes or extents that do not fit together.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A precondition of an operation was violated by the caller.
class ContractError : public Error {
 public:
  using Error::Error;
};

/// Invalid model or run configuration, detected at construction time.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A forward value or gradient turned NaN/Inf.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Bad argument value (count out of range, unknown key, ...).
class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// Evaluation was requested over zero valid pixels.
class EmptyEvaluationError : public Error {
 public:
  using Error::Error;
};

/// Malformed file contents. `offset()` is the byte position where parsing
/// stopped.
class FormatError : public Error {
 public:
  FormatError(const std::string& what, std::uint64_t offset)
      : Error(what + " (at byte " + std::to_string(offset) + ")"),
        offset_(offset) {}

  std::uint64_t offset() const { return offset_; }

 private:
  std::uint64_t offset_;
};

}  // namespace maga
