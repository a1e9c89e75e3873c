#include "impulse/stationary_density.hpp"

#include <cmath>

#include "impulse/errors.hpp"

namespace impulse {

struct StationaryDensity::Impl {
    DiffusionModel model;
    double bound = 0.0;    // truncation radius R
    double dx = 0.0;
    Eigen::ArrayXd nodes;        // -R .. R, odd count, 0 is a node
    Eigen::ArrayXd log_shape;    // int_0^x 2 b / sigma^2 at nodes
    Eigen::ArrayXd mass;         // cdf at nodes
    double norm = 0.0;           // C_{b,sigma} over [-R, R]

    double drift_ratio(double x) const { return 2.0 * model.drift(x) / model.sigma_sq(x); }

    double log_shape_at(double x) const {
        if (x < -bound || x > bound) {
            // continue the exponent integral past the tabulated range
            const double edge = x > 0 ? bound : -bound;
            const int n = std::max(3, static_cast<int>(std::ceil(std::abs(x - edge) / dx)) | 1);
            return log_shape_at(edge) +
                   integrate([this](double u) { return drift_ratio(u); }, edge, x, n);
        }
        auto i = static_cast<Eigen::Index>((x + bound) / dx);
        i = std::min(i, nodes.size() - 1);
        return log_shape[i] +
               simpson_panel([this](double u) { return drift_ratio(u); }, nodes[i], x);
    }

    double density(double x) const {
        return std::exp(log_shape_at(x)) / (model.sigma_sq(x) * norm);
    }

    double cdf_at(double x) const {
        if (x <= -bound) return 0.0;
        if (x >= bound) return mass[mass.size() - 1];
        auto i = static_cast<Eigen::Index>((x + bound) / dx);
        i = std::min(i, nodes.size() - 1);
        return mass[i] + simpson_panel([this](double u) { return density(u); }, nodes[i], x);
    }
};

StationaryDensity::StationaryDensity(DiffusionModel model, StationaryDensityConfig cfg) {
    model.class_params.check();
    auto impl = std::make_shared<Impl>();
    impl->model = std::move(model);

    const auto& p = impl->model.class_params;
    double bound = cfg.trunc_bound;
    if (bound <= 0.0) {
        // radius where the class tail bound exp(-2 gamma (R - A)) drops under tail_tol
        bound = p.recurrence_A + std::log(1.0 / cfg.tail_tol) / (2.0 * p.recurrence_gamma);
    }
    impl->bound = bound;

    int points = cfg.points;
    if (points <= 0) points = 2 * static_cast<int>(std::ceil(bound / 0.005)) + 1;
    if (points % 2 == 0) ++points;
    points = std::max(points, 101);

    impl->nodes = Eigen::ArrayXd::LinSpaced(points, -bound, bound);
    impl->dx = 2.0 * bound / (points - 1);

    Eigen::ArrayXd ratio(points);
    for (int i = 0; i < points; ++i) ratio[i] = impl->drift_ratio(impl->nodes[i]);
    if (!ratio.isFinite().all())
        throw OracleError("stationary density: drift/sigma^2 not finite on the grid");

    Eigen::ArrayXd cum = cumulative_integral(ratio, impl->dx);
    impl->log_shape = cum - cum[(points - 1) / 2]; // anchor the exponent at x = 0

    Eigen::ArrayXd unnorm(points);
    for (int i = 0; i < points; ++i)
        unnorm[i] = std::exp(impl->log_shape[i]) / impl->model.sigma_sq(impl->nodes[i]);
    Eigen::ArrayXd mass_unnorm = cumulative_integral(unnorm, impl->dx);
    impl->norm = mass_unnorm[points - 1];
    if (!std::isfinite(impl->norm) || impl->norm <= 0.0)
        throw OracleError("stationary density: normalizing constant is not finite/positive");
    impl->mass = mass_unnorm / impl->norm;

    const double total = impl->mass[points - 1];
    if (std::abs(total - 1.0) > cfg.quad_tol)
        throw OracleError("stationary density: normalization check failed");

    impl_ = std::move(impl);
}

double StationaryDensity::operator()(double x) const { return impl_->density(x); }
double StationaryDensity::cdf(double x) const { return impl_->cdf_at(x); }
double StationaryDensity::norm_constant() const { return impl_->norm; }
double StationaryDensity::trunc_bound() const { return impl_->bound; }
const DiffusionModel& StationaryDensity::model() const { return impl_->model; }

double StationaryDensity::min_on(double lo, double hi) const {
    if (!(hi > lo)) throw std::invalid_argument("min_on: need hi > lo");
    const int n = std::max(64, static_cast<int>(std::ceil((hi - lo) / impl_->dx)));
    double best = impl_->density(lo);
    for (int i = 1; i <= n; ++i)
        best = std::min(best, impl_->density(lo + (hi - lo) * i / n));
    return best;
}

HittingTimeCurve::HittingTimeCurve(const StationaryDensity& density, double base, double x_max,
                                   int nodes, InnerLimit inner)
    : density_(density), base_(base), x_max_(x_max) {
    if (!(x_max > base)) throw std::invalid_argument("HittingTimeCurve: need x_max > base");
    const double mass_floor = inner == InnerLimit::base_level ? density_.cdf(base) : 0.0;
    auto integrand = [rho = density_, mass_floor](double y) {
        return 2.0 * (rho.cdf(y) - mass_floor) / (rho.model().sigma_sq(y) * rho(y));
    };
    curve_ = CumulativeCurve(integrand, base, x_max, nodes);
}

double HittingTimeCurve::operator()(double level) const {
    if (level < base_ - 1e-12)
        throw std::invalid_argument("hitting-time curve: level below the base state");
    return curve_(std::max(level, base_));
}

double expected_hitting_time(const StationaryDensity& density, double base, double level) {
    if (level < base) throw std::invalid_argument("expected_hitting_time: need level >= base");
    if (level == base) return 0.0;
    return HittingTimeCurve(density, base, level)(level);
}

double expected_hitting_time_truncated(const StationaryDensity& density, double base,
                                       double level) {
    if (level < base) throw std::invalid_argument("expected_hitting_time: need level >= base");
    if (level == base) return 0.0;
    return HittingTimeCurve(density, base, level, 2049, InnerLimit::base_level)(level);
}

}  // namespace impulse
