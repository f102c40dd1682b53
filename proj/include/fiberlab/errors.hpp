#pragma once

#include <stdexcept>
#include <string>

namespace fiberlab {

// Base class for all library errors. CLI maps these to exit code 1.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed domain objects: bad matrices, inadmissible words, depth
// mismatches, invalid resolutions and the like.
struct InvalidInput : Error {
    using Error::Error;
};

// A declared constant (alpha or H) was exceeded by an observed ratio.
// Carries a printable witness of the violating sample.
struct CertificationFailure : Error {
    std::string witness;
    CertificationFailure(const std::string& msg, std::string witness_)
        : Error(msg + " [witness: " + witness_ + "]"), witness(std::move(witness_)) {}
};

// A run would exceed the configured memory cap; message carries the estimate.
struct MemoryLimit : Error {
    using Error::Error;
};

// Config file problems; CLI maps these to exit code 65.
struct ConfigError : Error {
    using Error::Error;
};

}  // namespace fiberlab
