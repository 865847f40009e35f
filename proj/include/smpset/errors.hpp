#pragma once

#include <stdexcept>
#include <string>

namespace smpset {

/// Invalid input: bad dimensions, malformed files, inconsistent configuration.
class validation_error : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// Raised when a dimension check between two objects fails.
class dimension_error : public validation_error {
  public:
    dimension_error(const std::string& what, long expected, long actual)
        : validation_error(what + ": expected dimension " + std::to_string(expected) + ", got " +
                           std::to_string(actual)) {}
};

/// A computation broke down numerically (singular system, non-finite result).
class numerical_error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// File could not be read or written.
class io_error : public std::runtime_error {
  public:
    io_error(const std::string& what, const std::string& path) : std::runtime_error(what + ": " + path) {}
};

namespace detail {
inline void require(bool condition, const std::string& message) {
    if (!condition) throw validation_error(message);
}
inline void require_dim(const std::string& what, long expected, long actual) {
    if (expected != actual) throw dimension_error(what, expected, actual);
}
} // namespace detail

} // namespace smpset
