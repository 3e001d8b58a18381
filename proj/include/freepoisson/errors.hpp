#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace freepoisson {

/// Precondition violated by the caller (mismatched sizes, bad index ranges).
struct UsageError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// A configured enumeration or word-length cap would be exceeded.
struct ResourceLimitError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A truncated computation cannot certify its result (Fock depth too small,
/// Poisson tail bound above tolerance).
struct TruncationError : ResourceLimitError {
    using ResourceLimitError::ResourceLimitError;
};

/// Two independent routes disagree.
struct OracleMismatch : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Invalid experiment configuration. `line` is 1-based, 0 when unknown.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::size_t line, const std::string& what)
        : std::runtime_error(line == 0 ? what : "line " + std::to_string(line) + ": " + what),
          line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

} // namespace freepoisson
