#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <stdexcept>

namespace impulse {

/// Simpson's rule on [a, b] with the midpoint of the panel.
inline double simpson_panel(const std::function<double(double)>& f, double a, double b) {
    if (a == b) return 0.0;
    return (b - a) / 6.0 * (f(a) + 4.0 * f(0.5 * (a + b)) + f(b));
}

/// Composite Simpson over [a, b]; `nodes` is rounded up to the next odd count >= 3.
inline double integrate(const std::function<double(double)>& f, double a, double b, int nodes) {
    if (a == b) return 0.0;
    if (nodes < 3) nodes = 3;
    if (nodes % 2 == 0) ++nodes;
    const double h = (b - a) / (nodes - 1);
    double odd = 0.0, even = 0.0;
    for (int i = 1; i < nodes - 1; ++i) {
        const double v = f(a + i * h);
        if (i % 2 == 1) odd += v; else even += v;
    }
    return h / 3.0 * (f(a) + 4.0 * odd + 2.0 * even + f(b));
}

/// Cumulative integral of uniformly sampled values, Simpson-grade accuracy.
/// Each subinterval is integrated with the quadratic through the three
/// nearest nodes, so every node carries a fourth-order cumulative value.
inline Eigen::ArrayXd cumulative_integral(const Eigen::ArrayXd& f, double dx) {
    const Eigen::Index n = f.size();
    Eigen::ArrayXd out(n);
    if (n == 0) return out;
    out[0] = 0.0;
    if (n == 1) return out;
    if (n == 2) {
        out[1] = 0.5 * dx * (f[0] + f[1]);
        return out;
    }
    out[1] = out[0] + dx / 12.0 * (5.0 * f[0] + 8.0 * f[1] - f[2]);
    for (Eigen::Index i = 2; i < n; ++i)
        out[i] = out[i - 1] + dx / 12.0 * (-f[i - 2] + 8.0 * f[i - 1] + 5.0 * f[i]);
    return out;
}

/// Tabulated cumulative integral of a smooth integrand on a uniform grid,
/// evaluable anywhere in [lo, hi]: node value plus a local Simpson panel
/// for the partial cell, so accuracy does not depend on where the query
/// falls between nodes.
class CumulativeCurve {
public:
    CumulativeCurve() = default;
    CumulativeCurve(std::function<double(double)> integrand, double lo, double hi, int nodes)
        : integrand_(std::move(integrand)), lo_(lo), hi_(hi) {
        if (!(hi > lo)) throw std::invalid_argument("CumulativeCurve: hi must exceed lo");
        if (nodes < 3) nodes = 3;
        if (nodes % 2 == 0) ++nodes;
        dx_ = (hi - lo) / (nodes - 1);
        Eigen::ArrayXd vals(nodes);
        for (int i = 0; i < nodes; ++i) vals[i] = integrand_(lo + i * dx_);
        cumulative_ = cumulative_integral(vals, dx_);
    }

    double lo() const { return lo_; }
    double hi() const { return hi_; }

    double operator()(double x) const {
        if (x < lo_ - 1e-9 || x > hi_ + 1e-9)
            throw std::invalid_argument("CumulativeCurve: query outside tabulated range");
        x = std::min(std::max(x, lo_), hi_);
        auto i = static_cast<Eigen::Index>((x - lo_) / dx_);
        i = std::min(i, cumulative_.size() - 1);
        const double xi = lo_ + static_cast<double>(i) * dx_;
        return cumulative_[i] + simpson_panel(integrand_, xi, x);
    }

private:
    std::function<double(double)> integrand_;
    double lo_ = 0.0, hi_ = 1.0, dx_ = 1.0;
    Eigen::ArrayXd cumulative_;
};

}  // namespace impulse
