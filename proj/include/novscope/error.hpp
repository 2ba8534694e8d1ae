#pragma once

#include <stdexcept>
#include <string>

namespace novscope {

// Base for all library errors. The CLI maps subclasses onto exit codes.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Bad input: malformed files, precondition violations, invalid configs.
class ValidationError : public Error {
public:
    using Error::Error;
};

// A cached stage output was produced under a different configuration.
class StaleCacheError : public Error {
public:
    using Error::Error;
};

// Numerical failure during optimization (NaN/Inf objective).
class NumericalError : public Error {
public:
    using Error::Error;
};

}  // namespace novscope
