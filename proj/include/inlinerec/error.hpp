#pragma once

#include <stdexcept>
#include <string>

namespace inlinerec {

/// Base of every exception thrown by the toolkit.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent input data (bad manifest, bad JSON record, ...).
class DataError : public Error {
public:
    using Error::Error;
};

/// Caller violated an operation's precondition.
class UsageError : public Error {
public:
    using Error::Error;
};

} // namespace inlinerec
