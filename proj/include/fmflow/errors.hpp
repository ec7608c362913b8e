#pragma once

#include <stdexcept>
#include <string>

namespace fmflow {

// Input outside the mathematical domain of an operation (e.g. rho on the
// [0,1] boundary, non-positive exchange rate).
struct DomainError : std::domain_error {
    explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

// An evaluation produced NaN or infinity.
struct NonFiniteError : std::runtime_error {
    explicit NonFiniteError(const std::string& what) : std::runtime_error(what) {}
};

// Step controller cannot meet the tolerance at the minimum step size.
struct StepFailure : std::runtime_error {
    explicit StepFailure(const std::string& what) : std::runtime_error(what) {}
};

// Marginal case the closed-form analysis is invalid for (alpha2 == 4).
struct DegenerateError : std::runtime_error {
    explicit DegenerateError(const std::string& what) : std::runtime_error(what) {}
};

// Not enough oscillation structure to fit an envelope.
struct FitError : std::runtime_error {
    explicit FitError(const std::string& what) : std::runtime_error(what) {}
};

// Trajectory too short for the requested sampling interval.
struct SamplingError : std::runtime_error {
    explicit SamplingError(const std::string& what) : std::runtime_error(what) {}
};

// Two indicator series do not share a sample grid.
struct GridMismatch : std::runtime_error {
    explicit GridMismatch(const std::string& what) : std::runtime_error(what) {}
};

// Bad or contradictory scenario configuration (CLI exit code 2).
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// A documented internal invariant failed while emitting results (CLI exit
// code 4); indicates a bug, not bad input.
struct InvariantViolation : std::logic_error {
    explicit InvariantViolation(const std::string& what) : std::logic_error(what) {}
};

}  // namespace fmflow
