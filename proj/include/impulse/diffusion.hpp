#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>

#include "impulse/scalar_function.hpp"

namespace impulse {

/// Constants describing the admissible model class: linear drift growth,
/// inward drift pressure beyond +-recurrence_A, and two-sided volatility
/// bounds. These are claims about the model; `validate_class_membership`
/// checks them on a grid.
struct DriftClassParams {
    double lin_growth_C = 1.0;     // |b(x)| <= C (1 + |x|), C >= 1
    double recurrence_A = 1.0;     // sign condition applies for |x| > A
    double recurrence_gamma = 0.5; // b(x)/sigma^2(x) * sgn(x) <= -gamma there
    double sigma_lower = 1.0;
    double sigma_upper = 1.0;

    /// Throws ValidationError unless the numeric constraints hold.
    void check() const;
};

/// Scalar diffusion dX = b(X) dt + sigma(X) dW with its claimed class
/// constants. Construction is cheap and does not validate; simulation ops
/// work on any model, the solver requires a validated one.
struct DiffusionModel {
    ScalarFunction drift;
    ScalarFunction sigma;
    DriftClassParams class_params;

    double sigma_sq(double x) const {
        const double s = sigma(x);
        return s * s;
    }
};

struct ClassViolation {
    double x;
    std::string message;
};

struct ValidationReport {
    bool passed = false;
    std::optional<ClassViolation> first_violation;
};

/// Checks growth, volatility bounds and the recurrence sign condition at
/// every grid point. The grid must be nonempty and reach beyond
/// +-recurrence_A on both sides. Non-finite drift/sigma values raise
/// ValidationError (broken descriptor, not class failure).
ValidationReport validate_class_membership(const DiffusionModel& model,
                                           const Eigen::ArrayXd& grid);

/// Convenience: uniform validation grid over [-reach, reach].
ValidationReport validate_class_membership(const DiffusionModel& model,
                                           double reach, int points = 2001);

/// Uniformly time-discretized trajectory. duration() = dt * (len - 1).
struct SamplePath {
    double t0 = 0.0;
    double dt = 0.0;
    std::uint64_t seed = 0;
    Eigen::ArrayXd values;

    double duration() const { return dt * static_cast<double>(values.size() - 1); }
};

/// Euler-Maruyama trajectory of `model` from x0, deterministic in
/// (model, x0, T, dt, seed). Length floor(T/dt) + 1. Throws
/// SimulationError if the state leaves the finite range.
SamplePath simulate_path(const DiffusionModel& model, double x0, double T, double dt,
                         std::uint64_t seed);

struct HittingResult {
    double time = 0.0; // grid time of the first state >= level, or t_cap
    bool hit = false;
};

/// Simulates from x0 until the discrete path first reaches `level`
/// (strictly above x0) or `t_cap` elapses.
HittingResult first_hitting_time(const DiffusionModel& model, double x0, double level,
                                 double dt, std::uint64_t seed, double t_cap);

// -- path files ---------------------------------------------------------
//
// Binary layout: magic "IMPL1", then t0 (f64), dt (f64), n (u64),
// seed (u64), then n little-endian f64 states. CSV form: comment lines
// starting with '#', a "t,x" header, then one t,x row per state.

void write_path_binary(const SamplePath& path, const std::string& file);
SamplePath read_path_binary(const std::string& file);
void write_path_csv(const SamplePath& path, const std::string& file);
SamplePath read_path_csv(const std::string& file); // seed is not representable in CSV

}  // namespace impulse
