#pragma once

#include <stdexcept>
#include <string>

namespace tsm {

// Input outside the domain of a map or vector field (negative stock,
// coordinate at the compactified point at infinity, point outside a box).
class DomainError : public std::domain_error {
public:
    explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

// Invalid numeric parameter (non-positive regularizer, negative radius, ...).
class ParameterError : public std::invalid_argument {
public:
    explicit ParameterError(const std::string& what) : std::invalid_argument(what) {}
};

// API misuse: mismatched grids, empty control sets, dimension mismatches.
class UsageError : public std::logic_error {
public:
    explicit UsageError(const std::string& what) : std::logic_error(what) {}
};

// Malformed run configuration.  Carries the 1-based line number when known.
class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& what, int line = 0)
        : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
          line_(line) {}
    int line() const noexcept { return line_; }

private:
    int line_;
};

// Unreadable or corrupt files.
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace tsm
