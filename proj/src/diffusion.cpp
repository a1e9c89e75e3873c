#include "impulse/diffusion.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <vector>

#include "impulse/errors.hpp"
#include "impulse/rng.hpp"

namespace impulse {

void DriftClassParams::check() const {
    if (!(lin_growth_C >= 1.0)) throw ValidationError("class params: need C >= 1");
    if (!(recurrence_A > 0.0)) throw ValidationError("class params: need A > 0");
    if (!(recurrence_gamma > 0.0)) throw ValidationError("class params: need gamma > 0");
    if (!(sigma_lower > 0.0 && sigma_lower <= sigma_upper && std::isfinite(sigma_upper)))
        throw ValidationError("class params: need 0 < sigma_lower <= sigma_upper < inf");
}

ValidationReport validate_class_membership(const DiffusionModel& model,
                                           const Eigen::ArrayXd& grid) {
    model.class_params.check();
    if (grid.size() == 0) throw std::invalid_argument("validation grid is empty");
    const auto& p = model.class_params;
    if (grid.minCoeff() > -p.recurrence_A || grid.maxCoeff() < p.recurrence_A)
        throw std::invalid_argument("validation grid must reach beyond +-recurrence_A");

    ValidationReport report;
    for (Eigen::Index i = 0; i < grid.size(); ++i) {
        const double x = grid[i];
        const double b = model.drift(x);
        const double s = model.sigma(x);
        if (!std::isfinite(b) || !std::isfinite(s))
            throw ValidationError("non-finite drift or sigma at x=" + std::to_string(x));
        char msg[128];
        if (std::abs(b) > p.lin_growth_C * (1.0 + std::abs(x))) {
            std::snprintf(msg, sizeof(msg), "|b(%g)|=%g exceeds C(1+|x|)=%g", x, std::abs(b),
                          p.lin_growth_C * (1.0 + std::abs(x)));
            report.first_violation = ClassViolation{x, msg};
            return report;
        }
        if (std::abs(s) < p.sigma_lower || std::abs(s) > p.sigma_upper) {
            std::snprintf(msg, sizeof(msg), "|sigma(%g)|=%g outside [%g, %g]", x, std::abs(s),
                          p.sigma_lower, p.sigma_upper);
            report.first_violation = ClassViolation{x, msg};
            return report;
        }
        if (std::abs(x) > p.recurrence_A) {
            const double pressure = b / (s * s) * (x > 0 ? 1.0 : -1.0);
            if (pressure > -p.recurrence_gamma) {
                std::snprintf(msg, sizeof(msg),
                              "b/sigma^2 * sgn(x) = %g > -gamma = %g at x=%g", pressure,
                              -p.recurrence_gamma, x);
                report.first_violation = ClassViolation{x, msg};
                return report;
            }
        }
    }
    report.passed = true;
    return report;
}

ValidationReport validate_class_membership(const DiffusionModel& model, double reach,
                                           int points) {
    if (points < 2) points = 2;
    return validate_class_membership(
        model, Eigen::ArrayXd::LinSpaced(points, -reach, reach));
}

SamplePath simulate_path(const DiffusionModel& model, double x0, double T, double dt,
                         std::uint64_t seed) {
    if (!(T > 0.0) || !(dt > 0.0) || dt > T)
        throw std::invalid_argument("simulate_path: need 0 < dt <= T");
    const auto steps = static_cast<Eigen::Index>(std::floor(T / dt + 1e-9));
    SamplePath path;
    path.t0 = 0.0;
    path.dt = dt;
    path.seed = seed;
    path.values.resize(steps + 1);

    NormalSampler normal(seed);
    const double sqrt_dt = std::sqrt(dt);
    double x = x0;
    path.values[0] = x;
    for (Eigen::Index k = 0; k < steps; ++k) {
        x += model.drift(x) * dt + model.sigma(x) * sqrt_dt * normal();
        if (!std::isfinite(x))
            throw SimulationError("simulation blow-up at step " + std::to_string(k + 1),
                                  static_cast<std::size_t>(k));
        path.values[k + 1] = x;
    }
    return path;
}

HittingResult first_hitting_time(const DiffusionModel& model, double x0, double level,
                                 double dt, std::uint64_t seed, double t_cap) {
    if (!(level > x0)) throw std::invalid_argument("first_hitting_time: need level > x0");
    if (!(t_cap > 0.0) || !(dt > 0.0))
        throw std::invalid_argument("first_hitting_time: need dt > 0 and t_cap > 0");

    NormalSampler normal(seed);
    const double sqrt_dt = std::sqrt(dt);
    const auto max_steps = static_cast<long long>(std::floor(t_cap / dt + 1e-9));
    double x = x0;
    for (long long k = 1; k <= max_steps; ++k) {
        x += model.drift(x) * dt + model.sigma(x) * sqrt_dt * normal();
        if (!std::isfinite(x))
            throw SimulationError("simulation blow-up at step " + std::to_string(k),
                                  static_cast<std::size_t>(k - 1));
        if (x >= level) return {static_cast<double>(k) * dt, true};
    }
    return {t_cap, false};
}

// -- path files ---------------------------------------------------------

namespace {

constexpr char kMagic[5] = {'I', 'M', 'P', 'L', '1'};

void put_u64(std::ostream& out, std::uint64_t v) {
    unsigned char buf[8];
    for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>(v >> (8 * i));
    out.write(reinterpret_cast<const char*>(buf), 8);
}

void put_f64(std::ostream& out, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    put_u64(out, bits);
}

std::uint64_t get_u64(std::istream& in) {
    unsigned char buf[8];
    in.read(reinterpret_cast<char*>(buf), 8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
    return v;
}

double get_f64(std::istream& in) {
    const std::uint64_t bits = get_u64(in);
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
}

}  // namespace

void write_path_binary(const SamplePath& path, const std::string& file) {
    std::ofstream out(file, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open '" + file + "' for writing");
    out.write(kMagic, sizeof(kMagic));
    put_f64(out, path.t0);
    put_f64(out, path.dt);
    put_u64(out, static_cast<std::uint64_t>(path.values.size()));
    put_u64(out, path.seed);
    for (Eigen::Index i = 0; i < path.values.size(); ++i) put_f64(out, path.values[i]);
    if (!out) throw std::runtime_error("short write to '" + file + "'");
}

SamplePath read_path_binary(const std::string& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + file + "'");
    char magic[5];
    in.read(magic, 5);
    if (!in || std::memcmp(magic, kMagic, 5) != 0)
        throw ValidationError("'" + file + "' is not an IMPL1 path file");
    SamplePath path;
    path.t0 = get_f64(in);
    path.dt = get_f64(in);
    const std::uint64_t n = get_u64(in);
    path.seed = get_u64(in);
    if (!in || n == 0 || !(path.dt > 0.0))
        throw ValidationError("'" + file + "' has a broken path header");
    path.values.resize(static_cast<Eigen::Index>(n));
    for (std::uint64_t i = 0; i < n; ++i) path.values[static_cast<Eigen::Index>(i)] = get_f64(in);
    if (!in) throw ValidationError("'" + file + "' is truncated");
    return path;
}

void write_path_csv(const SamplePath& path, const std::string& file) {
    std::ofstream out(file);
    if (!out) throw std::runtime_error("cannot open '" + file + "' for writing");
    char buf[96];
    std::snprintf(buf, sizeof(buf), "# dt=%.17g seed=%llu\n", path.dt,
                  static_cast<unsigned long long>(path.seed));
    out << buf << "t,x\n";
    for (Eigen::Index i = 0; i < path.values.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g\n",
                      path.t0 + static_cast<double>(i) * path.dt, path.values[i]);
        out << buf;
    }
    if (!out) throw std::runtime_error("short write to '" + file + "'");
}

SamplePath read_path_csv(const std::string& file) {
    std::ifstream in(file);
    if (!in) throw std::runtime_error("cannot open '" + file + "'");
    std::vector<double> ts, xs;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#' || line.rfind("t,", 0) == 0) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos)
            throw ValidationError("'" + file + "': expected t,x rows");
        ts.push_back(std::stod(line.substr(0, comma)));
        xs.push_back(std::stod(line.substr(comma + 1)));
    }
    if (xs.empty()) throw ValidationError("'" + file + "' holds no samples");
    SamplePath path;
    path.t0 = ts.front();
    path.dt = ts.size() > 1 ? ts[1] - ts[0] : 1.0;
    if (!(path.dt > 0.0)) throw ValidationError("'" + file + "': time column must increase");
    path.values = Eigen::Map<const Eigen::ArrayXd>(xs.data(), static_cast<Eigen::Index>(xs.size()));
    return path;
}

}  // namespace impulse
