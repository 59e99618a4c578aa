#pragma once

#include <stdexcept>
#include <string>

namespace rgl {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of a function (e.g. r <= 0).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Inadmissible parameter combination (kernel exponent, truncation, ...).
class ParameterError : public Error {
public:
    using Error::Error;
};

/// Malformed input data: wrong sizes, non-normalized measures, bad files.
class InputError : public Error {
public:
    using Error::Error;
};

/// An iterative method did not reach its target; carries the last residual.
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, double residual)
        : Error(what), residual_(residual) {}
    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

/// A sampling or sizing budget was exceeded.
class BudgetError : public Error {
public:
    using Error::Error;
};

}  // namespace rgl
