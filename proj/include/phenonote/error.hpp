#pragma once

#include <stdexcept>
#include <string>

namespace phenonote {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad input data: malformed files, inconsistent dimensions, degenerate sets.
/// The CLI maps this to exit code 2.
class DataError : public Error {
public:
    using Error::Error;
};

/// Invalid arguments or configuration. The CLI maps this to exit code 1.
class UsageError : public Error {
public:
    using Error::Error;
};

/// A numerical routine failed (non-convergence, non-finite values).
class NumericError : public Error {
public:
    using Error::Error;
};

}  // namespace phenonote
