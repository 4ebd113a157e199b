#pragma once

#include <stdexcept>
#include <string>

namespace nrb {

// Error taxonomy. Everything is an std::runtime_error so callers can catch
// broadly; the concrete types let tests and the CLI distinguish failure modes.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Bad function argument (wrong subsystem, mismatched spaces, bad grid, ...).
struct InvalidArgument : Error {
    using Error::Error;
};

// Parameter set that violates a documented precondition (negative rate,
// vanishing resonance denominator, no physical mean-field root, ...).
struct InfeasibleParameters : Error {
    using Error::Error;
};

// A configuration that makes an algebraic step singular.
struct SingularConfiguration : Error {
    using Error::Error;
};

// Liouvillian null space has dimension >= 2: no unique steady state.
struct NonUniqueSteadyState : Error {
    using Error::Error;
};

// Correlation requested on a state with (numerically) zero occupation.
struct UndefinedCorrelation : Error {
    using Error::Error;
};

// Adaptive integrator could not meet its tolerance / step underflow.
struct IntegratorFailure : Error {
    using Error::Error;
};

// Density matrix failed a sanity gate (eigenvalue below -1e-8, trace off, ...).
struct InvalidState : Error {
    using Error::Error;
};

// Config file problems; message carries the JSON path of the offender.
struct ConfigError : Error {
    using Error::Error;
};

} // namespace nrb
