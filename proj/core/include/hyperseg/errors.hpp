#pragma once

#include <stdexcept>
#include <string>

namespace hyperseg {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid parameters or an inconsistent configuration (CLI exit code 2).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Malformed, truncated or out-of-contract input data (CLI exit code 3).
class DataError : public Error {
public:
    using Error::Error;
};

/// Numerical failure: singular matrix, non-convergence, ... (CLI exit code 4).
class NumericalError : public Error {
public:
    using Error::Error;
};

} // namespace hyperseg
