#pragma once

#include <stdexcept>
#include <string>

namespace qtomo {

/// Base class for all library errors.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Raised when a state cannot be represented within the requested Fock cutoff.
struct TruncationError : Error {
    using Error::Error;
};

/// Raised for malformed state specifications (e.g. nonpositive mixture weights).
struct InvalidSpec : Error {
    using Error::Error;
};

/// Raised when an input matrix is too far from a physical density matrix.
struct NonPhysicalInput : Error {
    using Error::Error;
};

struct DimensionMismatch : Error {
    using Error::Error;
};

/// Raised when a probe grid contains coinciding probes after deduplication.
struct DuplicateProbe : Error {
    using Error::Error;
};

/// Raised when a closed form is evaluated in a regime it cannot handle.
struct NumericalInstability : Error {
    using Error::Error;
};

/// Raised for malformed pipeline configuration or input files.
struct ConfigError : Error {
    using Error::Error;
};

}  // namespace qtomo
