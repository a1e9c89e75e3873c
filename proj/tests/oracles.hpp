#pragma once

// Test-side reference implementations, coded independently of the library's
// quadrature so cross-checks compare two routes. Closed-form constants for
// the OU model dX = -X dt + dW (stationary N(0, 1/2)) are frozen here from
// high-precision evaluation of
//   xi(y)       = sqrt(pi) * int_0^y exp(u^2) (1 + erf u) du
//   xi_trunc(y) = sqrt(pi) * int_0^y exp(u^2) erf(u) du

#include <cmath>
#include <functional>

#include "impulse/problem.hpp"

namespace testref {

// recursive adaptive Simpson, deliberately separate from impulse::integrate
inline double adaptive_simpson_rec(const std::function<double(double)>& f, double a, double b,
                                   double fa, double fm, double fb, double whole, double tol,
                                   int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if (depth <= 0 || std::abs(left + right - whole) < 15.0 * tol)
        return left + right + (left + right - whole) / 15.0;
    return adaptive_simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           adaptive_simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                               double tol = 1e-10) {
    if (a == b) return 0.0;
    const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return adaptive_simpson_rec(f, a, b, fa, fm, fb, whole, tol, 40);
}

inline double gauss_density(double x) {
    return std::exp(-x * x) / std::sqrt(3.14159265358979323846);
}

inline double gauss_cdf(double x) { return 0.5 * (1.0 + std::erf(x)); }

inline double ou_xi(double y) {
    const double sqrt_pi = std::sqrt(3.14159265358979323846);
    return sqrt_pi *
           adaptive_simpson([](double u) { return std::exp(u * u) * (1.0 + std::erf(u)); }, 0.0,
                            y);
}

inline double ou_xi_trunc(double y) {
    const double sqrt_pi = std::sqrt(3.14159265358979323846);
    return sqrt_pi *
           adaptive_simpson([](double u) { return std::exp(u * u) * std::erf(u); }, 0.0, y);
}

// frozen closed-form values (see header comment)
inline constexpr double kOuXi05 = 1.2382645549;
inline constexpr double kOuXi10 = 4.0377283330;
inline constexpr double kOuXi15 = 12.9281655176;
inline constexpr double kOuXi18 = 29.7537747700;
inline constexpr double kOuXi20 = 56.5942625930;
inline constexpr double kOuXiTrunc10 = 1.4452456134;
inline constexpr double kOuXiTrunc18 = 14.0597604628;
inline constexpr double kGaussDensity0 = 0.5641895835477563;

inline impulse::DiffusionModel ou_model() {
    return {impulse::ScalarFunction::linear(-1.0), impulse::ScalarFunction::constant(1.0),
            {1.0, 1.0, 0.5, 1.0, 1.0}};
}

inline impulse::DiffusionModel tanh_model() {
    return {impulse::ScalarFunction::tanh(-1.2, 1.0), impulse::ScalarFunction::constant(1.0),
            {1.2, 1.0, 0.9, 1.0, 1.0}};
}

inline impulse::DiffusionModel sat_model() {
    return {impulse::ScalarFunction::piecewise_linear({-2.0, -1.0, 1.0, 2.0},
                                                      {2.0, 1.0, -1.0, -2.0}),
            impulse::ScalarFunction::constant(1.0),
            {1.0, 1.0, 1.0, 1.0, 1.0}};
}

/// The ou.toml catalog reward: g(y) = min(y, 1.8) - 0.5 on [0, 1.8].
inline impulse::RewardSpec ou_reward(const impulse::StationaryDensity& density) {
    return impulse::RewardSpec::with_default_bounds(
        impulse::ScalarFunction::capped_linear(1.8, 0.5), 0.0, 0.5, 1.8, density);
}

struct MeanSe {
    double mean = 0.0;
    double se = 0.0;
};

inline MeanSe mean_se(const std::vector<double>& xs) {
    MeanSe out;
    for (double x : xs) out.mean += x;
    out.mean /= static_cast<double>(xs.size());
    double ss = 0.0;
    for (double x : xs) ss += (x - out.mean) * (x - out.mean);
    if (xs.size() > 1)
        out.se = std::sqrt(ss / (static_cast<double>(xs.size()) - 1.0) /
                           static_cast<double>(xs.size()));
    return out;
}

}  // namespace testref
