#include "impulse/estimation.hpp"

#include <algorithm>
#include <cmath>

#include "impulse/errors.hpp"
#include "impulse/quadrature.hpp"

namespace impulse {

// -- kernels --------------------------------------------------------------

struct KernelSpec::Impl {
    ScalarFunction q;
    int order = 0;
    Eigen::ArrayXd cdf_table; // cumulative of q over [-1/2, 1/2]
    double dx = 0.0;
};

KernelSpec::KernelSpec(ScalarFunction q, int order, KernelCheckConfig cfg) {
    if (order < 0) throw ValidationError("kernel: order must be >= 0");

    for (int i = 0; i <= 400; ++i) {
        const double u = 0.5 * i / 400.0;
        if (std::abs(q(u) - q(-u)) > cfg.symmetry_tol)
            throw ValidationError("kernel: not symmetric at u=" + std::to_string(u));
    }
    for (int i = 1; i <= 300; ++i) {
        const double u = 0.5 + 1.5 * i / 300.0;
        if (std::abs(q(u)) > cfg.support_tol || std::abs(q(-u)) > cfg.support_tol)
            throw ValidationError("kernel: support leaks past [-1/2, 1/2] at |u|=" +
                                  std::to_string(u));
    }
    const double unit = integrate([&](double u) { return q(u); }, -0.5, 0.5, 2001);
    if (std::abs(unit - 1.0) > cfg.moment_tol)
        throw ValidationError("kernel: integral is " + std::to_string(unit) + ", expected 1");
    for (int j = 1; j <= order; ++j) {
        const double mj =
            integrate([&](double u) { return std::pow(u, j) * q(u); }, -0.5, 0.5, 2001);
        if (std::abs(mj) > cfg.moment_tol)
            throw ValidationError("kernel: moment " + std::to_string(j) + " is " +
                                  std::to_string(mj) + ", expected 0");
    }
    const double step = 1e-3;
    for (double u = -0.6; u < 0.6; u += step) {
        const double slope = std::abs(q(u + step) - q(u)) / step;
        if (slope > cfg.lipschitz_bound)
            throw ValidationError("kernel: slope " + std::to_string(slope) +
                                  " breaks the Lipschitz bound near u=" + std::to_string(u));
    }

    auto impl = std::make_shared<Impl>();
    impl->q = std::move(q);
    impl->order = order;
    const int n = 2049;
    impl->dx = 1.0 / (n - 1);
    Eigen::ArrayXd vals(n);
    for (int i = 0; i < n; ++i) vals[i] = impl->q(-0.5 + i * impl->dx);
    impl->cdf_table = cumulative_integral(vals, impl->dx);
    impl_ = std::move(impl);
}

double KernelSpec::operator()(double u) const { return impl_->q(u); }
int KernelSpec::order() const { return impl_->order; }
const ScalarFunction& KernelSpec::q() const { return impl_->q; }

double KernelSpec::cdf(double u) const {
    if (u <= -0.5) return 0.0;
    const auto& table = impl_->cdf_table;
    if (u >= 0.5) return table[table.size() - 1];
    const double pos = (u + 0.5) / impl_->dx;
    const auto i = std::min(static_cast<Eigen::Index>(pos), table.size() - 2);
    const double w = pos - static_cast<double>(i);
    return table[i] + w * (table[i + 1] - table[i]);
}

KernelSpec KernelSpec::epanechnikov() {
    return {ScalarFunction::compact_polynomial(0.5, {1.5, 0.0, -6.0}), 1};
}

KernelSpec KernelSpec::polynomial_order3() {
    return {ScalarFunction::compact_polynomial(0.5, {2.8125, 0.0, -37.5, 0.0, 105.0}), 3};
}

// -- density estimates -----------------------------------------------------

struct DensityEstimate::Impl {
    Kind kind = Kind::kernel;
    Eigen::ArrayXd sorted;   // left-endpoint samples, ascending
    double dt = 0.0;
    double duration = 0.0;
    double smoothing = 0.0;  // h or eps
    bool warning = false;

    // kernel kind
    std::shared_ptr<const KernelSpec> kernel;

    // local-time kind
    ScalarFunction sigma;
    Eigen::ArrayXd band_prefix; // prefix sums of sigma^2(v)/sigma^2(v - eps/2)

    const double* begin() const { return sorted.data(); }
    const double* end() const { return sorted.data() + sorted.size(); }

    double eval_kernel(double x) const {
        const double h = smoothing;
        const double* lo = std::lower_bound(begin(), end(), x - 0.5 * h);
        const double* hi = std::upper_bound(lo, end(), x + 0.5 * h);
        double sum = 0.0;
        for (const double* v = lo; v != hi; ++v) sum += (*kernel)((x - *v) / h);
        return sum * dt / (duration * h);
    }

    double eval_local_time(double x) const {
        const double eps = smoothing;
        const double* lo = std::lower_bound(begin(), end(), x);
        const double* hi = std::upper_bound(lo, end(), x + eps);
        double occupation = 0.0;
        for (const double* v = lo; v != hi; ++v) {
            const double s = sigma(*v);
            occupation += s * s;
        }
        occupation *= dt / eps; // approximate local time at x
        return occupation / (duration * sigma(x) * sigma(x));
    }

    double mass_below_kernel(double x) const {
        const double h = smoothing;
        const double* lo = std::lower_bound(begin(), end(), x - 0.5 * h);
        const double* hi = std::upper_bound(lo, end(), x + 0.5 * h);
        double sum = static_cast<double>(lo - begin()); // fully covered samples
        for (const double* v = lo; v != hi; ++v) sum += kernel->cdf((x - *v) / h);
        return sum * dt / duration;
    }

    double mass_below_local_time(double x) const {
        const double eps = smoothing;
        const double* lo = std::lower_bound(begin(), end(), x);
        const double* hi = std::upper_bound(lo, end(), x + eps);
        double sum = lo == begin() ? 0.0 : band_prefix[lo - begin() - 1];
        for (const double* v = lo; v != hi; ++v) {
            const double s_v = sigma(*v);
            const double s_mid = sigma(*v - 0.5 * eps);
            sum += (x - (*v - eps)) / eps * (s_v * s_v) / (s_mid * s_mid);
        }
        return sum * dt / duration;
    }
};

namespace {

Eigen::ArrayXd left_endpoints_sorted(const SamplePath& path) {
    if (path.values.size() < 2 || !(path.dt > 0.0))
        throw std::invalid_argument("density estimate: path needs duration > 0");
    Eigen::ArrayXd sorted = path.values.head(path.values.size() - 1);
    std::sort(sorted.data(), sorted.data() + sorted.size());
    return sorted;
}

}  // namespace

DensityEstimate DensityEstimate::kernel_from_sorted(Eigen::ArrayXd sorted, double dt,
                                                    double duration, const KernelSpec& kernel,
                                                    double h) {
    if (!(h > 0.0)) throw std::invalid_argument("kernel density: need h > 0");
    if (!(duration > 0.0) || sorted.size() == 0)
        throw std::invalid_argument("kernel density: need a nonempty record");
    DensityEstimate est;
    auto impl = std::make_shared<Impl>();
    impl->kind = Kind::kernel;
    impl->sorted = std::move(sorted);
    impl->dt = dt;
    impl->duration = duration;
    impl->smoothing = h;
    impl->warning = h < 2.0 * dt;
    impl->kernel = std::make_shared<const KernelSpec>(kernel);
    est.impl_ = std::move(impl);
    return est;
}

DensityEstimate DensityEstimate::kernel(const SamplePath& path, const KernelSpec& kernel,
                                        double h) {
    return kernel_from_sorted(left_endpoints_sorted(path), path.dt, path.duration(), kernel, h);
}

DensityEstimate DensityEstimate::local_time(const SamplePath& path, double eps,
                                            ScalarFunction sigma) {
    if (!(eps > 0.0)) throw std::invalid_argument("local-time density: need eps > 0");
    DensityEstimate est;
    auto impl = std::make_shared<Impl>();
    impl->kind = Kind::local_time;
    impl->sorted = left_endpoints_sorted(path);
    impl->dt = path.dt;
    impl->duration = path.duration();
    impl->smoothing = eps;
    impl->sigma = std::move(sigma);

    const Eigen::Index n = impl->sorted.size();
    impl->band_prefix.resize(n);
    double acc = 0.0;
    double sigma_max = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double v = impl->sorted[i];
        const double s_v = impl->sigma(v);
        const double s_mid = impl->sigma(v - 0.5 * eps);
        acc += (s_v * s_v) / (s_mid * s_mid);
        impl->band_prefix[i] = acc;
        sigma_max = std::max(sigma_max, std::abs(s_v));
    }
    impl->warning = eps < 2.0 * path.dt * sigma_max;
    est.impl_ = std::move(impl);
    return est;
}

double DensityEstimate::operator()(double x) const {
    return impl_->kind == Kind::kernel ? impl_->eval_kernel(x) : impl_->eval_local_time(x);
}

double DensityEstimate::integral_below(double x) const {
    return impl_->kind == Kind::kernel ? impl_->mass_below_kernel(x)
                                       : impl_->mass_below_local_time(x);
}

DensityEstimate::Kind DensityEstimate::kind() const { return impl_->kind; }
double DensityEstimate::duration() const { return impl_->duration; }
double DensityEstimate::smoothing() const { return impl_->smoothing; }
bool DensityEstimate::resolution_warning() const { return impl_->warning; }

double default_local_time_band(const SamplePath& path, const ScalarFunction& sigma) {
    double s2_max = 0.0;
    for (Eigen::Index i = 0; i + 1 < path.values.size(); ++i) {
        const double s = sigma(path.values[i]);
        s2_max = std::max(s2_max, s * s);
    }
    return std::max(2.0 * path.dt * s2_max, std::sqrt(path.dt));
}

double kernel_density_estimate(const SamplePath& path, const KernelSpec& kernel, double h,
                               double x) {
    return DensityEstimate::kernel(path, kernel, h)(x);
}

double local_time_density_estimate(const SamplePath& path, double eps,
                                   const ScalarFunction& sigma, double x) {
    return DensityEstimate::local_time(path, eps, sigma)(x);
}

// -- plug-in hitting-time estimate ------------------------------------------

struct HittingTimeEstimate::Impl {
    double base = 0.0, x_max = 0.0, dx = 0.0;
    double floor_a = 0.0, floor_M1 = 0.0;
    InnerLimit inner = InnerLimit::base_level;
    std::function<double(double)> pdf;
    std::function<double(double)> cdf;
    std::function<double(double)> sigma_sq;
    Eigen::ArrayXd nodes;
    Eigen::ArrayXd inner_cum; // mass integral at nodes
    Eigen::ArrayXd xi_cum;    // 2 * cumulative integrand at nodes

    double mass_at(double y) const {
        if (inner == InnerLimit::minus_infinity) return cdf(y);
        auto i = static_cast<Eigen::Index>((y - base) / dx);
        i = std::min(std::max<Eigen::Index>(i, 0), nodes.size() - 1);
        return inner_cum[i] + simpson_panel(pdf, nodes[i], y);
    }

    double integrand(double y) const {
        return mass_at(y) / (std::max(pdf(y), floor_a) * sigma_sq(y));
    }

    double eval(double x) const {
        if (x < base - 1e-9 || x > x_max + 1e-9)
            throw std::invalid_argument("hitting-time estimate queried outside [base, x_max]");
        x = std::min(std::max(x, base), x_max);
        auto i = static_cast<Eigen::Index>((x - base) / dx);
        i = std::min(i, nodes.size() - 1);
        const double raw =
            xi_cum[i] +
            2.0 * simpson_panel([this](double y) { return integrand(y); }, nodes[i], x);
        return std::max(floor_M1, raw);
    }
};

HittingTimeEstimate build_hitting_time_estimate(std::function<double(double)> density,
                                                std::function<double(double)> density_cdf,
                                                const ScalarFunction& sigma, double base,
                                                double floor_a, double floor_M1,
                                                const HittingTimeEstimateConfig& cfg) {
    if (!(floor_a > 0.0)) throw std::invalid_argument("hitting-time estimate: need a > 0");
    if (!(floor_M1 > 0.0)) throw std::invalid_argument("hitting-time estimate: need M1 > 0");
    if (!(cfg.x_max > base))
        throw std::invalid_argument("hitting-time estimate: need x_max > base");
    if (cfg.inner == InnerLimit::minus_infinity && !density_cdf)
        throw std::invalid_argument(
            "hitting-time estimate: minus_infinity inner limit needs a density cdf");

    auto impl = std::make_shared<HittingTimeEstimate::Impl>();
    impl->base = base;
    impl->x_max = cfg.x_max;
    impl->floor_a = floor_a;
    impl->floor_M1 = floor_M1;
    impl->inner = cfg.inner;
    impl->pdf = std::move(density);
    impl->cdf = std::move(density_cdf);
    impl->sigma_sq = [sigma](double y) {
        const double s = sigma(y);
        return s * s;
    };

    int n = std::max(cfg.nodes, 33);
    if (n % 2 == 0) ++n;
    impl->nodes = Eigen::ArrayXd::LinSpaced(n, base, cfg.x_max);
    impl->dx = (cfg.x_max - base) / (n - 1);

    Eigen::ArrayXd pdf_nodes(n);
    for (int i = 0; i < n; ++i) pdf_nodes[i] = impl->pdf(impl->nodes[i]);

    if (cfg.inner == InnerLimit::minus_infinity) {
        impl->inner_cum.resize(n);
        for (int i = 0; i < n; ++i) impl->inner_cum[i] = impl->cdf(impl->nodes[i]);
    } else {
        impl->inner_cum = cumulative_integral(pdf_nodes, impl->dx);
    }

    Eigen::ArrayXd integrand_nodes(n);
    for (int i = 0; i < n; ++i)
        integrand_nodes[i] = impl->inner_cum[i] /
                             (std::max(pdf_nodes[i], floor_a) * impl->sigma_sq(impl->nodes[i]));
    impl->xi_cum = 2.0 * cumulative_integral(integrand_nodes, impl->dx);

    HittingTimeEstimate est;
    est.impl_ = std::move(impl);
    return est;
}

HittingTimeEstimate build_hitting_time_estimate(const DensityEstimate& density,
                                                const ScalarFunction& sigma, double base,
                                                double floor_a, double floor_M1,
                                                const HittingTimeEstimateConfig& cfg) {
    return build_hitting_time_estimate(
        [density](double x) { return density(x); },
        [density](double x) { return density.integral_below(x); }, sigma, base, floor_a,
        floor_M1, cfg);
}

double HittingTimeEstimate::operator()(double x) const { return impl_->eval(x); }
double HittingTimeEstimate::base() const { return impl_->base; }
double HittingTimeEstimate::x_max() const { return impl_->x_max; }
double HittingTimeEstimate::floor_a() const { return impl_->floor_a; }
double HittingTimeEstimate::floor_M1() const { return impl_->floor_M1; }
InnerLimit HittingTimeEstimate::inner() const { return impl_->inner; }

ThresholdEstimate estimate_threshold(const HittingTimeEstimate& xi_hat, const RewardSpec& reward,
                                     int grid_n) {
    if (xi_hat.x_max() < reward.beta() - 1e-9)
        throw std::invalid_argument("estimate_threshold: estimate does not cover [y1, beta]");
    auto result = detail::grid_argmax([&](double y) { return reward(y) / xi_hat(y); },
                                      reward.y1(), reward.beta(), grid_n);
    return {result.x, result.value};
}

}  // namespace impulse
