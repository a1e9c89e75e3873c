#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace impulse {

/// A named scalar function of one real variable, evaluable on all of R and
/// locally Lipschitz by construction. Instances carry a textual descriptor
/// (`spec()`) that round-trips through `parse()`, which is what problem
/// files and run metadata store.
///
/// Built-ins:
///   constant(c)                         c
///   linear(a[, b])                      a*x + b
///   polynomial(c0, c1, ...)             sum c_k x^k
///   tanh(s, r)                          s * tanh(r*x)
///   pwl(x1:y1, x2:y2, ...)              linear interpolation through the
///                                       knots, constant beyond the ends
///   capped_linear(cap, cost)            min(x, cap) - cost
///   capped_log(cap, s, cost)            s * log1p(min(x, cap)) - cost
///   compact_polynomial(w, c0, c1, ...)  polynomial on [-w, w], 0 outside
class ScalarFunction {
public:
    ScalarFunction() = default;

    double operator()(double x) const { return (*eval_)(x); }
    const std::string& spec() const { return spec_; }
    bool valid() const { return static_cast<bool>(eval_); }

    static ScalarFunction parse(const std::string& spec);

    static ScalarFunction constant(double c);
    static ScalarFunction linear(double slope, double intercept = 0.0);
    static ScalarFunction polynomial(std::vector<double> coeffs);
    static ScalarFunction tanh(double scale, double rate);
    static ScalarFunction piecewise_linear(std::vector<double> xs, std::vector<double> ys);
    static ScalarFunction capped_linear(double cap, double cost);
    static ScalarFunction capped_log(double cap, double scale, double cost);
    static ScalarFunction compact_polynomial(double half_width, std::vector<double> coeffs);

private:
    ScalarFunction(std::function<double(double)> eval, std::string spec);

    std::shared_ptr<const std::function<double(double)>> eval_;
    std::string spec_;
};

}  // namespace impulse
