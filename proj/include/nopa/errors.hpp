#pragma once

#include <stdexcept>
#include <string>

namespace nopa {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid user input: parameters out of range, malformed configuration.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Input is well-formed but lies outside the domain of a formula or search.
class DomainError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

/// A numerical procedure failed (singular solve, non-convergence, ...).
class NumericalError : public Error {
public:
    using Error::Error;
};

/// The requested operation needs a stable network and the network is not.
class UnstableError : public Error {
public:
    UnstableError(const std::string& what, double max_real_eig)
        : Error(what), max_real_eig_(max_real_eig) {}

    [[nodiscard]] double max_real_eig() const noexcept { return max_real_eig_; }

private:
    double max_real_eig_;
};

}  // namespace nopa
