#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace lapinc {

/// Malformed input text (edge lists, MatrixMarket, JSON documents).
class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A documented precondition of an operation does not hold.
class PreconditionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Operation not allowed in the object's current state (e.g. stepping a stopped session).
class StateError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// An iterative solver stopped before reaching its tolerance.
class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(const std::string& what, std::size_t iterations, double residual,
                     std::size_t basis_size = 0)
        : std::runtime_error(what), iterations_(iterations), residual_(residual),
          basis_size_(basis_size) {}

    std::size_t iterations() const noexcept { return iterations_; }
    double residual() const noexcept { return residual_; }
    /// Number of eigenpairs already known when the failure happened.
    std::size_t basis_size() const noexcept { return basis_size_; }

private:
    std::size_t iterations_;
    double residual_;
    std::size_t basis_size_;
};

}  // namespace lapinc
