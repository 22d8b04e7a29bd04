#pragma once

#include <stdexcept>
#include <string>

namespace topopt {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A specification or coefficient violates its documented invariants.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// Problem set-up references something the mesh or config does not define.
class ConfigurationError : public Error {
public:
    using Error::Error;
};

/// Name lookup failed (unknown boundary tag, unknown parameter).
class LookupError : public Error {
public:
    using Error::Error;
};

/// Iterative solve did not reach the requested relative residual.
class SolverError : public Error {
public:
    SolverError(const std::string& what, double residual, int iterations)
        : Error(what), residual_(residual), iterations_(iterations) {}

    double residual() const noexcept { return residual_; }
    int iterations() const noexcept { return iterations_; }

private:
    double residual_;
    int iterations_;
};

} // namespace topopt
