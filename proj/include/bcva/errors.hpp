#pragma once

#include <stdexcept>
#include <string>

namespace bcva {

/// Parameter outside the mathematical domain of an operation.
class DomainError : public std::invalid_argument {
public:
    explicit DomainError(const std::string& what) : std::invalid_argument(what) {}
};

/// Denominator of a Riccati solution reached zero.
class PoleError : public DomainError {
public:
    explicit PoleError(const std::string& what) : DomainError(what) {}
};

/// Malformed or inconsistent configuration.
class ConfigError : public std::invalid_argument {
public:
    explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

/// Quadrature or interpolation tolerance not met.
class AccuracyError : public std::runtime_error {
public:
    explicit AccuracyError(const std::string& what) : std::runtime_error(what) {}
};

/// One or more oracle comparisons failed.
class ValidationFailure : public std::runtime_error {
public:
    explicit ValidationFailure(const std::string& what) : std::runtime_error(what) {}
};

} // namespace bcva
