#pragma once

#include <stdexcept>
#include <string>

namespace atomfringe {

/// Input violates a documented precondition or invariant.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

/// Spectral decomposition is unusable because eigenvalues coincide;
/// callers should switch to the series propagator.
class DegenerateSpectrumError : public std::runtime_error {
public:
    explicit DegenerateSpectrumError(const std::string& what) : std::runtime_error(what) {}
};

/// An internal cross-check failed (e.g. a result that must be real came
/// out with a large imaginary residue). Indicates a bug, not bad input.
class ConsistencyError : public std::runtime_error {
public:
    explicit ConsistencyError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace atomfringe
