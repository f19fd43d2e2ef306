#pragma once

#include <stdexcept>
#include <string>

namespace srj {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A rational factor hit a pole, e.g. kappa == 1/omega_i or coincident weights.
class PoleError : public Error {
public:
    using Error::Error;
};

/// A value object was constructed with data violating its invariants.
class InvariantError : public Error {
public:
    using Error::Error;
};

/// An iterative procedure exhausted its budget without meeting its tolerance.
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, double best_residual)
        : Error(what), best_residual_(best_residual) {}

    double best_residual() const noexcept { return best_residual_; }

private:
    double best_residual_;
};

/// The field blew past the representable range during a relaxation cycle.
class OverflowError : public Error {
public:
    using Error::Error;
};

/// A lookup found no suitable entry.
class NotFoundError : public Error {
public:
    using Error::Error;
};

/// Malformed parameter-table text.
class ParseError : public Error {
public:
    ParseError(const std::string& what, int line)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

    int line() const noexcept { return line_; }

private:
    int line_;
};

}  // namespace srj
