#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace asymgame {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed payoff expression; `offset` is the byte position in the source text.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t offset)
      : Error(what + " at offset " + std::to_string(offset)), offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

class EvalError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration or invalid domain object.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Linear program could not be solved (infeasible, unbounded, numerical trouble).
class LpError : public Error {
 public:
  using Error::Error;
};

/// Problem instance exceeds a configured size cap.
class LimitError : public Error {
 public:
  using Error::Error;
};

}  // namespace asymgame
