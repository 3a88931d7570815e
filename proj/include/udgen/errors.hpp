#pragma once

#include <stdexcept>
#include <string>

namespace udgen {

/// Extent mismatch between two operands.
class ShapeError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Non-finite value, divergence, or an otherwise unusable numeric result.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid input data or configuration (empty sets, out-of-range values).
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A persisted artifact failed validation on load.
class CorruptionError : public DataError {
public:
    using DataError::DataError;
};

/// The sampling policy has no feasible cell to draw from.
class PolicyDegenerateError : public DataError {
public:
    using DataError::DataError;
};

}  // namespace udgen
