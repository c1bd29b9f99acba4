#pragma once

#include <stdexcept>
#include <string>

namespace regionopt {

/// Base class for all failures raised by the toolkit.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed or out-of-range configuration. The message names the offending key.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Numerical failure: singular pivot, negative density, unbracketable root.
class SolverError : public Error {
public:
    using Error::Error;
};

/// An iterative method did not reach its tolerance within its budget.
class ConvergenceError : public Error {
public:
    using Error::Error;
};

}  // namespace regionopt
