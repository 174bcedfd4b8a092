#ifndef RMNOISE_ERRORS_HPP
#define RMNOISE_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace rmnoise {

// Parameter or argument outside its mathematical domain.
struct DomainError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Coexistence equilibrium does not exist for the given parameters.
struct InfeasibleEquilibrium : DomainError {
    using DomainError::DomainError;
};

// Jacobian fails the trace<0, det>0 stability test.
struct NotHurwitz : DomainError {
    using DomainError::DomainError;
};

// Symmetric matrix is not positive semidefinite within tolerance.
struct NotPSD : DomainError {
    using DomainError::DomainError;
};

struct NotPositiveDefinite : DomainError {
    using DomainError::DomainError;
};

// Lyapunov 3x3 system numerically singular despite the Hurwitz check.
struct SingularSystem : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Closure has no exact integer-jump CTMC representation.
struct UnsupportedClosure : DomainError {
    using DomainError::DomainError;
};

// Covariance factorization failed at an interior state during integration.
struct StepFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InsufficientData : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Config validation errors carry a JSON-pointer path to the offending key.
struct SchemaError : std::runtime_error {
    std::string pointer;
    SchemaError(std::string ptr, const std::string& what)
        : std::runtime_error(what + " at " + ptr), pointer(std::move(ptr)) {}
};

struct ValueError : std::runtime_error {
    std::string pointer;
    ValueError(std::string ptr, const std::string& what)
        : std::runtime_error(what + " at " + ptr), pointer(std::move(ptr)) {}
};

}  // namespace rmnoise

#endif
