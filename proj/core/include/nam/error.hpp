#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace nam {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Incompatible tensor or model shapes.
class ShapeError : public Error {
  public:
    using Error::Error;
};

// Invalid argument or configuration value.
class ConfigError : public Error {
  public:
    using Error::Error;
};

// Malformed or truncated input data. Carries the byte offset where parsing
// stopped, when one is known.
class DataError : public Error {
  public:
    explicit DataError(const std::string& what, std::int64_t offset = -1)
        : Error(offset >= 0 ? what + " (at byte offset " + std::to_string(offset) + ")" : what),
          offset_(offset) {}

    std::int64_t offset() const noexcept { return offset_; }

  private:
    std::int64_t offset_;
};

// Non-finite loss, gradient or parameter.
class NumericError : public Error {
  public:
    using Error::Error;
};

} // namespace nam
