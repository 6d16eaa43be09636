#pragma once

#include <stdexcept>
#include <string>

namespace sspd {

/// Base class for all toolkit errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Invalid configuration, parameters, or input validation failure.
/// CLI maps this family to exit code 2.
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& msg) : Error(msg) {}
};

/// Numerical failure: non-convergence, domain violations discovered during
/// computation, or results outside representable ranges.
/// CLI maps this family to exit code 3.
class NumericError : public Error {
public:
    explicit NumericError(const std::string& msg) : Error(msg) {}
};

/// The detector cannot fire under the requested conditions (zero efficiency
/// or zero illumination), so the waiting-time distribution does not exist.
/// Distinct from a numerical failure so callers can branch on it.
class NeverFiresError : public NumericError {
public:
    explicit NeverFiresError(const std::string& msg) : NumericError(msg) {}
};

/// File system / serialization failure. CLI maps this family to exit code 4.
class IoError : public Error {
public:
    explicit IoError(const std::string& msg) : Error(msg) {}
};

} // namespace sspd
