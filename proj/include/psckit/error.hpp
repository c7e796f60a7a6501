#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace psckit {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Inconsistent or out-of-range configuration values.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Shape mismatch between operands.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Invalid algorithm parameter (negative threshold, alpha outside [0,1], ...).
class ParameterError : public Error {
 public:
  using Error::Error;
};

// Non-finite value encountered where a finite one is required.
class NumericalError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Malformed binary payload; carries the byte offset where decoding failed.
class FormatError : public Error {
 public:
  FormatError(const std::string& what, std::size_t offset)
      : Error(what + " (at byte offset " + std::to_string(offset) + ")"),
        offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

}  // namespace psckit
