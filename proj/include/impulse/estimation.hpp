#pragma once

#include <Eigen/Dense>
#include <functional>
#include <memory>

#include "impulse/problem.hpp"

namespace impulse {

/// The default bandwidth rule for the kernel density estimator: T^{-1/2}
/// for a record of duration T.
inline double default_bandwidth(double duration) { return 1.0 / std::sqrt(duration); }

struct KernelCheckConfig {
    double symmetry_tol = 1e-9;
    double support_tol = 1e-9;   // |Q| beyond [-1/2, 1/2]
    double moment_tol = 1e-6;    // integral and vanishing-moment defects
    double lipschitz_bound = 200.0;
};

/// A smoothing kernel with compact support [-1/2, 1/2]. Construction
/// verifies symmetry, support, unit integral, vanishing moments up to
/// `order`, and a Lipschitz bound, all numerically; a kernel that fails
/// any check is rejected.
class KernelSpec {
public:
    KernelSpec(ScalarFunction q, int order, KernelCheckConfig cfg = {});

    double operator()(double u) const;
    /// Antiderivative of the kernel, 0 at -1/2 (tabulated once).
    double cdf(double u) const;
    int order() const;
    const ScalarFunction& q() const;

    /// Epanechnikov rescaled to [-1/2, 1/2]: 1.5 - 6 u^2. Order 1,
    /// nonnegative; the default everywhere.
    static KernelSpec epanechnikov();
    /// Symmetric quartic with vanishing second moment (order 3), for
    /// experiments with smoother densities. Takes negative values.
    static KernelSpec polynomial_order3();

private:
    struct Impl;
    std::shared_ptr<const Impl> impl_;
};

/// An invariant-density estimate built from one pass over a sample path;
/// immutable, cheap to copy, evaluation is thread-safe. The kernel kind is
/// the time-average of Q((x - X)/h)/h; the local-time kind is the
/// band-occupation approximation of L_T^x / (T sigma^2(x)).
class DensityEstimate {
public:
    enum class Kind { kernel, local_time };

    static DensityEstimate kernel(const SamplePath& path, const KernelSpec& kernel, double h);
    /// Same estimator over an already-sorted record of left endpoints with
    /// its own duration; lets callers maintain the record incrementally.
    static DensityEstimate kernel_from_sorted(Eigen::ArrayXd sorted, double dt, double duration,
                                              const KernelSpec& kernel, double h);
    static DensityEstimate local_time(const SamplePath& path, double eps, ScalarFunction sigma);

    double operator()(double x) const;
    /// Mass of the estimate below x (exact for the kernel kind via the
    /// kernel antiderivative; midpoint band integral for local time).
    double integral_below(double x) const;

    Kind kind() const;
    double duration() const;
    /// Bandwidth h (kernel) or band width eps (local time).
    double smoothing() const;
    /// Set when the smoothing scale is under twice the sampling
    /// resolution, so discretization dominates the estimate.
    bool resolution_warning() const;

private:
    DensityEstimate() = default;
    struct Impl;
    std::shared_ptr<const Impl> impl_;
};

/// Spec default band for the local-time estimator:
/// max(2 dt max sigma^2, sqrt(dt)).
double default_local_time_band(const SamplePath& path, const ScalarFunction& sigma);

/// One-off evaluations (build an estimate once when evaluating repeatedly).
double kernel_density_estimate(const SamplePath& path, const KernelSpec& kernel, double h,
                               double x);
double local_time_density_estimate(const SamplePath& path, double eps,
                                   const ScalarFunction& sigma, double x);

struct HittingTimeEstimateConfig {
    double x_max = 0.0;                          // required: upper end of the evaluation range
    InnerLimit inner = InnerLimit::base_level;   // the plug-in definition integrates from y0
    int nodes = 513;
};

/// Plug-in estimate of the expected hitting time: nested quadrature of
/// 2 * mass(y) / ((rho(y) v a) sigma^2(y)) from the base level, floored at
/// M1. Nondecreasing wherever the density estimate is nonnegative, and at
/// least M1 everywhere.
class HittingTimeEstimate {
public:
    double operator()(double x) const; // defined on [base, x_max]

    double base() const;
    double x_max() const;
    double floor_a() const;
    double floor_M1() const;
    InnerLimit inner() const;

private:
    friend HittingTimeEstimate build_hitting_time_estimate(
        std::function<double(double)> density, std::function<double(double)> density_cdf,
        const ScalarFunction& sigma, double base, double floor_a, double floor_M1,
        const HittingTimeEstimateConfig& cfg);
    HittingTimeEstimate() = default;
    struct Impl;
    std::shared_ptr<const Impl> impl_;
};

/// Core builder; `density_cdf` is only consulted for the minus_infinity
/// inner limit and may be empty otherwise.
HittingTimeEstimate build_hitting_time_estimate(std::function<double(double)> density,
                                                std::function<double(double)> density_cdf,
                                                const ScalarFunction& sigma, double base,
                                                double floor_a, double floor_M1,
                                                const HittingTimeEstimateConfig& cfg);

HittingTimeEstimate build_hitting_time_estimate(const DensityEstimate& density,
                                                const ScalarFunction& sigma, double base,
                                                double floor_a, double floor_M1,
                                                const HittingTimeEstimateConfig& cfg);

struct ThresholdEstimate {
    double y = 0.0;     // grid argmax of g / xi_hat, smallest-y tie-break
    double value = 0.0; // estimated rate at y
};

ThresholdEstimate estimate_threshold(const HittingTimeEstimate& xi_hat,
                                     const RewardSpec& reward, int grid_n = 512);

}  // namespace impulse
