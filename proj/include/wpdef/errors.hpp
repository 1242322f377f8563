#pragma once

#include <stdexcept>
#include <string>

namespace wpdef {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Generators are (numerically) linearly dependent over the reals.
class DegenerateLattice : public Error {
public:
    using Error::Error;
};

/// Evaluation point lies on a lattice point.
class PoleError : public Error {
public:
    using Error::Error;
};

/// A duplication step needs to divide by a vanishing derivative.
class HalfPeriodSingularity : public Error {
public:
    using Error::Error;
};

/// The addition formula was asked for ℘(z+w) with ℘(z) == ℘(w).
class DegenerateAddition : public Error {
public:
    using Error::Error;
};

class RootFindingFailure : public Error {
public:
    using Error::Error;
};

/// Argument outside the open interval of an interval bijection.
class DomainError : public Error {
public:
    using Error::Error;
};

/// A sample point for rational fitting hit a pole or a zero of ℘′
/// and the resampling budget was exhausted.
class SingularSample : public Error {
public:
    using Error::Error;
};

/// Held-out residual of a rational fit exceeded the tolerance.
class FitFailure : public Error {
public:
    FitFailure(const std::string& what, double residual)
        : Error(what), residual_(residual) {}

    /// Best held-out residual seen over all attempted degree bounds.
    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

}  // namespace wpdef
