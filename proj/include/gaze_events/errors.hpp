#pragma once

#include <stdexcept>
#include <string>

namespace gaze {

// Base class for everything thrown by this library. CLI maps subclasses of
// DataError to exit code 2, anything else unexpected to 3.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Bad input data: malformed files, degenerate streams, mismatched corpora.
struct DataError : Error {
    using Error::Error;
};

struct FormatError : DataError {
    using DataError::DataError;
};

struct EmptySessionError : DataError {
    using DataError::DataError;
};

struct DegenerateTimestepError : DataError {
    DegenerateTimestepError(const std::string& msg, std::size_t index)
        : DataError(msg), index(index) {}
    std::size_t index;
};

struct AlignmentError : DataError {
    using DataError::DataError;
};

struct InfeasibleProtocolError : DataError {
    using DataError::DataError;
};

struct InvalidConfigurationError : DataError {
    using DataError::DataError;
};

struct UndefinedMetricError : DataError {
    using DataError::DataError;
};

// Programming-contract violations (wrong arity, empty grids, invalid vectors).
struct ContractError : Error {
    using Error::Error;
};

} // namespace gaze
