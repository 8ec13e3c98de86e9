#pragma once

#include <stdexcept>
#include <string>

namespace dispflow {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Bad grid shape, field/grid mismatch, non-finite data.
struct GridError : Error {
    using Error::Error;
};

/// Invalid configuration or CLI input.
struct ConfigError : Error {
    using Error::Error;
};

/// Iterative solver failure: non-convergence, NaN, Picard stagnation.
struct SolverError : Error {
    using Error::Error;
};

/// Evaluation outside the admissible region of an identity or chart.
struct DomainError : Error {
    using Error::Error;
};

}  // namespace dispflow
