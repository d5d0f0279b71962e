#ifndef FBP_ERRORS_HPP
#define FBP_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace fbp {

// Root of every exception thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Invalid user input: bad config values, malformed files, unsupported options.
class ConfigError : public Error {
public:
    using Error::Error;
};

// Anything that goes wrong while computing. The CLI maps these to exit code 2.
class NumericalError : public Error {
public:
    using Error::Error;
};

// Argument outside the domain of a function (poles, singular points,
// unsupported indices).
class DomainError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

// Series, quadrature, root finding or iterative solvers that did not reach
// their tolerance.
class ConvergenceError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

// Singular or ill-conditioned linear systems.
class SingularMatrixError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

// Boundary/source data violating the compatibility conditions at the corners.
class IncompatibleDataError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

// Coefficient fields whose sign pattern cannot be split into inflow/outflow.
class SignStructureError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

// Flow profiles outside the admissible neighbourhood of the shear flow.
class InadmissibleError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

// Fixed-point iteration whose increments keep growing.
class DivergenceError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

} // namespace fbp

#endif
