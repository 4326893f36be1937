#pragma once

#include <stdexcept>
#include <string>

namespace ikm {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed or invariant-violating input (scene documents, CLI flags, data files).
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Schema violation in a structured document; the message names the field.
class ParseError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

/// Singularities, divisions by zero, rank deficiency, aliasing.
class NumericError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

} // namespace ikm
