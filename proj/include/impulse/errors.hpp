#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace impulse {

/// Model, reward or input-file content failed a validity check.
struct ValidationError : std::runtime_error {
    explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

/// Quadrature could not produce a finite, converged value.
struct OracleError : std::runtime_error {
    explicit OracleError(const std::string& what) : std::runtime_error(what) {}
};

/// Trajectory left the representable range; carries the last finite step.
struct SimulationError : std::runtime_error {
    SimulationError(const std::string& what, std::size_t last_finite)
        : std::runtime_error(what), last_finite_index(last_finite) {}
    std::size_t last_finite_index;
};

/// Experiment-level failure (too many broken cells, unusable fit input).
struct ExperimentError : std::runtime_error {
    explicit ExperimentError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace impulse
