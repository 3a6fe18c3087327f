#pragma once

#include <stdexcept>
#include <string>

namespace prefgeo {

// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A covariance matrix failed Cholesky factorization even after jitter
// escalation. Carries the largest jitter attempted.
struct NotPositiveDefinite : Error {
    NotPositiveDefinite(const std::string& what, double jitter)
        : Error(what + " (max jitter attempted: " + std::to_string(jitter) + ")"),
          jitter_attempted(jitter) {}
    double jitter_attempted;
};

// The regression design matrix sum(w w^T) is numerically singular.
struct SingularDesign : Error {
    using Error::Error;
};

// Too few populated small lags to extrapolate a curve to lag zero.
struct InsufficientPairs : Error {
    using Error::Error;
};

// Dense-likelihood factorization failed after jitter escalation.
struct FactorizationFailure : Error {
    using Error::Error;
};

// Malformed input files, out-of-domain marks, bad config values.
struct DataError : Error {
    using Error::Error;
};

// Replicate-level generation failure (e.g. runaway point count).
struct SimulationError : Error {
    using Error::Error;
};

}  // namespace prefgeo
