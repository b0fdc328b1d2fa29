#pragma once

#include <stdexcept>
#include <string>

namespace magvit {

// Error taxonomy shared by all modules. The CLI maps these onto exit codes:
// usage/config -> 2, data/io -> 3.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Violated precondition on an in-memory call (out-of-range index, shape mismatch).
struct DomainError : Error {
    using Error::Error;
};

// Caller asked for something the interface does not allow.
struct UsageError : Error {
    using Error::Error;
};

// Invalid or inconsistent configuration values.
struct ConfigError : UsageError {
    using UsageError::UsageError;
};

// File contents that parse but are wrong (bad magic, out-of-range token id).
struct DataError : Error {
    using Error::Error;
};

// Missing or unreadable files.
struct IoError : DataError {
    using DataError::DataError;
};

// Training diverged (non-finite loss).
struct TrainingError : Error {
    using Error::Error;
};

} // namespace magvit
