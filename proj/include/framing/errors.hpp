#pragma once

#include <stdexcept>
#include <string>

namespace framing {

// Bad input data, configuration, or violated preconditions. CLI exit code 2.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Raw generation that cannot be mapped to taxonomy roles under a strict
// policy. Shares exit code 2 with ValidationError.
class ParseError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

// Inference backend unreachable or misbehaving. CLI exit code 3.
class BackendError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Transport-level failure: the backend could not be reached at all.
class BackendUnreachable : public BackendError {
public:
    using BackendError::BackendError;
};

}  // namespace framing
