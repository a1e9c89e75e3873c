#pragma once

#include <Eigen/Dense>
#include <memory>

#include "impulse/diffusion.hpp"
#include "impulse/quadrature.hpp"

namespace impulse {

/// Lower limit of the mass integral feeding the expected-hitting-time
/// quadrature. `minus_infinity` is the classical formula; `base_level`
/// drops the mass below the restart level and matches the plug-in
/// estimator's definition. The two differ by the stationary mass below
/// the base level.
enum class InnerLimit { minus_infinity, base_level };

struct StationaryDensityConfig {
    double trunc_bound = 0.0; // 0: derived from the class tail bound and tail_tol
    int points = 0;           // 0: node spacing ~ 0.005 over the truncated range
    double tail_tol = 1e-12;
    double quad_tol = 1e-8;
};

/// Quadrature oracle for the stationary density of an ergodic model:
/// rho(x) = exp(int_0^x 2 b / sigma^2) / (C sigma^2(x)), with C the
/// normalizing constant over the truncated range. Evaluation beyond the
/// truncation radius continues the same formula (normalized by the
/// truncated constant). Instances share immutable tables; copies are cheap
/// and thread-safe.
class StationaryDensity {
public:
    explicit StationaryDensity(DiffusionModel model, StationaryDensityConfig cfg = {});

    double operator()(double x) const;
    /// Mass below x, anchored at the left truncation edge (the true tail
    /// below it is under tail_tol by the class bound).
    double cdf(double x) const;
    double norm_constant() const;
    double trunc_bound() const;
    /// Smallest density value over a sampling of [lo, hi]; used to place
    /// the estimator's density floor in tests.
    double min_on(double lo, double hi) const;
    const DiffusionModel& model() const;

private:
    struct Impl;
    std::shared_ptr<const Impl> impl_;
};

/// Expected time for the uncontrolled diffusion started at `base` to reach
/// a level in [base, x_max]; nondecreasing, zero at the base. Built from a
/// StationaryDensity by quadrature of 2 * mass(y) / (sigma^2(y) rho(y)).
class HittingTimeCurve {
public:
    HittingTimeCurve(const StationaryDensity& density, double base, double x_max,
                     int nodes = 2049, InnerLimit inner = InnerLimit::minus_infinity);

    double operator()(double level) const;
    double base() const { return base_; }
    double x_max() const { return x_max_; }

private:
    StationaryDensity density_;
    double base_, x_max_;
    CumulativeCurve curve_;
};

/// One-off quadrature of the expected hitting time base -> level.
double expected_hitting_time(const StationaryDensity& density, double base, double level);

/// Variant with the mass integral started at the base level instead of
/// -infinity; the comparison target for the plug-in estimator.
double expected_hitting_time_truncated(const StationaryDensity& density, double base,
                                       double level);

}  // namespace impulse
