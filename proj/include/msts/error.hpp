#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace msts {

/// Base class for all errors raised by this library.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed input file. Carries the 1-based line number when known.
class ParseError : public Error {
public:
  ParseError(const std::string& what, std::size_t line = 0)
      : Error(line > 0 ? what + " (line " + std::to_string(line) + ")" : what),
        line_(line) {}

  std::size_t line() const { return line_; }

private:
  std::size_t line_;
};

/// Precondition violation on an API call.
class InvalidArgument : public Error {
public:
  using Error::Error;
};

/// Cache entry exists but was built for a different dataset or configuration.
class StaleCacheError : public Error {
public:
  using Error::Error;
};

/// Cache file is truncated or fails its checksum.
class CorruptCacheError : public Error {
public:
  using Error::Error;
};

/// Merit formula radicand is non-positive; the inputs are pathological and
/// the caller must see that rather than a silently clamped score.
class MeritDomainError : public Error {
public:
  using Error::Error;
};

} // namespace msts
