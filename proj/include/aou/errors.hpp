#pragma once

#include <stdexcept>
#include <string>

namespace aou {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Joint state space (or subset lattice) exceeds the configured cap.
struct EnumerationTooLargeError : Error {
    using Error::Error;
};

// A total assignment was required but a value is absent.
struct MissingValueError : Error {
    using Error::Error;
};

// Conditioning event has zero prior mass.
struct ImpossibleEvidenceError : Error {
    using Error::Error;
};

struct InvalidArgumentError : Error {
    using Error::Error;
};

// Bad run configuration (missing credential, unknown strategy, ...).
struct ConfigError : Error {
    using Error::Error;
};

// Network-level failure after retries were exhausted.
struct TransportError : Error {
    using Error::Error;
};

// Endpoint answered but the body is not a usable chat completion.
struct ProtocolError : Error {
    using Error::Error;
};

// Unreadable or malformed input file (worlds, datasets, scripts).
struct LoadError : Error {
    using Error::Error;
};

}  // namespace aou
