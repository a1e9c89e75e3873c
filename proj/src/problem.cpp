#include "impulse/problem.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <set>

#include "impulse/errors.hpp"

namespace impulse {

namespace {

void check_reward_shape(const ScalarFunction& g, double y0, double y1, double beta) {
    if (!(y0 < y1 && y1 < beta))
        throw ValidationError("reward: need y0 < y1 < beta");
    if (!(g(y0 + 1e-6) < 0.0))
        throw ValidationError("reward: g must be negative just above y0 (intervention cost)");
    if (!(g(y1) >= 0.0))
        throw ValidationError("reward: g(y1) must be >= 0");
    for (int i = 1; i < 100; ++i) {
        const double y = y0 + (y1 - y0) * i / 100.0;
        if (!(g(y) < 0.0))
            throw ValidationError("reward: g must stay negative on (y0, y1), violated at y=" +
                                  std::to_string(y));
    }
    const double g_beta = g(beta);
    if (!(g_beta > 0.0)) throw ValidationError("reward: g(beta) must be positive");
    const double reach = beta + 3.0 * (beta - y0);
    for (int i = 1; i <= 64; ++i) {
        const double y = beta + (reach - beta) * i / 64.0;
        if (g(y) > g_beta + 1e-12)
            throw ValidationError("reward: g must not exceed g(beta) past beta, violated at y=" +
                                  std::to_string(y));
    }
}

}  // namespace

RewardSpec::RewardSpec(ScalarFunction g, double y0, double y1, double beta, double M1, double M2)
    : g_(std::move(g)), y0_(y0), y1_(y1), beta_(beta), m1_(M1), m2_(M2) {
    check_reward_shape(g_, y0_, y1_, beta_);
    if (!(M1 > 0.0 && M1 <= M2))
        throw ValidationError("reward: need 0 < M1 <= M2");
}

double RewardSpec::operator()(double y) const {
    if (y == y0_) return 0.0;
    if (y < y0_) throw std::invalid_argument("reward queried below the base level");
    return g_(y);
}

RewardSpec RewardSpec::with_default_bounds(ScalarFunction g, double y0, double y1, double beta,
                                           const StationaryDensity& density) {
    const double m1 = 0.5 * expected_hitting_time(density, y0, y1);
    const double m2 = 2.0 * expected_hitting_time(density, y0, beta);
    return {std::move(g), y0, y1, beta, m1, m2};
}

namespace detail {

GridArgmax grid_argmax(const std::function<double(double)>& f, double lo, double hi, int n) {
    if (n < 2) throw std::invalid_argument("grid_argmax: need at least 2 grid points");
    GridArgmax out;
    out.grid = Eigen::ArrayXd::LinSpaced(n, lo, hi);
    out.values.resize(n);
    for (int i = 0; i < n; ++i) out.values[i] = f(out.grid[i]);
    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i < n; ++i)
        if (out.values[i] > out.values[best]) best = i;
    out.x = out.grid[best];
    out.value = out.values[best];
    return out;
}

}  // namespace detail

OracleSolution solve_oracle(const StationaryDensity& density, const RewardSpec& reward,
                            int grid_n) {
    HittingTimeCurve xi(density, reward.y0(), reward.beta());
    if (xi(reward.y1()) < 1e-12)
        throw OracleError("solve_oracle: xi(y1) degenerate, quadrature unusable");
    auto result = detail::grid_argmax(
        [&](double y) { return reward(y) / xi(y); }, reward.y1(), reward.beta(), grid_n);
    OracleSolution sol;
    sol.phi = result.value;
    sol.y_star = result.x;
    sol.grid = std::move(result.grid);
    sol.rate = std::move(result.values);
    return sol;
}

OracleSolution solve_oracle(const DiffusionModel& model, const RewardSpec& reward, int grid_n) {
    const auto& p = model.class_params;
    const double reach = std::max(p.recurrence_A * 2.0, p.recurrence_A + 3.0);
    auto report = validate_class_membership(model, reach);
    if (!report.passed)
        throw ValidationError("solve_oracle: model failed class validation at x=" +
                              std::to_string(report.first_violation->x) + ": " +
                              report.first_violation->message);
    return solve_oracle(StationaryDensity(model), reward, grid_n);
}

double threshold_reward_rate(const StationaryDensity& density, const RewardSpec& reward,
                             double y) {
    if (y < reward.y1() || y > reward.beta())
        throw std::invalid_argument("threshold_reward_rate: y outside [y1, beta]");
    return reward(y) / expected_hitting_time(density, reward.y0(), y);
}

double threshold_reward_rate(const DiffusionModel& model, const RewardSpec& reward, double y) {
    return threshold_reward_rate(StationaryDensity(model), reward, y);
}

// -- problem files -------------------------------------------------------

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return {};
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

std::string unquote(std::string v) {
    if (v.size() >= 2 && ((v.front() == '"' && v.back() == '"') ||
                          (v.front() == '\'' && v.back() == '\'')))
        return v.substr(1, v.size() - 2);
    return v;
}

double to_number(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const double x = std::stod(v, &pos);
        if (trim(v.substr(pos)).empty()) return x;
    } catch (const std::exception&) {
    }
    throw ValidationError("problem file: key '" + key + "' needs a number, got '" + v + "'");
}

}  // namespace

ProblemInputs parse_problem_file(const std::string& file) {
    std::ifstream in(file);
    if (!in) throw ValidationError("cannot open problem file '" + file + "'");

    std::map<std::string, std::string> kv;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ValidationError("problem file '" + file + "' line " + std::to_string(line_no) +
                                  ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = unquote(trim(line.substr(eq + 1)));
        if (key.empty() || value.empty())
            throw ValidationError("problem file '" + file + "' line " + std::to_string(line_no) +
                                  ": empty key or value");
        if (!kv.emplace(key, value).second)
            throw ValidationError("problem file '" + file + "': duplicate key '" + key + "'");
    }

    static const std::set<std::string> known = {
        "drift", "sigma", "lin_growth_C", "recurrence_A", "recurrence_gamma",
        "sigma_lower", "sigma_upper", "reward", "y0", "y1", "beta",
        "M1", "M2", "m", "a", "trunc_bound", "quad_points"};
    for (const auto& [key, value] : kv)
        if (!known.count(key))
            throw ValidationError("problem file '" + file + "': unknown key '" + key + "'");

    auto require = [&](const std::string& key) -> const std::string& {
        auto it = kv.find(key);
        if (it == kv.end())
            throw ValidationError("problem file '" + file + "': missing key '" + key + "'");
        return it->second;
    };
    auto number = [&](const std::string& key) { return to_number(key, require(key)); };
    auto optional_number = [&](const std::string& key) -> std::optional<double> {
        auto it = kv.find(key);
        if (it == kv.end()) return std::nullopt;
        return to_number(key, it->second);
    };

    ProblemInputs inputs;
    inputs.model.drift = ScalarFunction::parse(require("drift"));
    inputs.model.sigma = ScalarFunction::parse(require("sigma"));
    inputs.model.class_params.lin_growth_C = number("lin_growth_C");
    inputs.model.class_params.recurrence_A = number("recurrence_A");
    inputs.model.class_params.recurrence_gamma = number("recurrence_gamma");
    inputs.model.class_params.sigma_lower = number("sigma_lower");
    inputs.model.class_params.sigma_upper = number("sigma_upper");
    inputs.g = ScalarFunction::parse(require("reward"));
    inputs.y0 = number("y0");
    inputs.y1 = number("y1");
    inputs.beta = number("beta");
    inputs.M1 = optional_number("M1");
    inputs.M2 = optional_number("M2");
    inputs.m = optional_number("m");
    inputs.floor_a = optional_number("a");
    if (auto tb = optional_number("trunc_bound")) inputs.density_cfg.trunc_bound = *tb;
    if (auto qp = optional_number("quad_points"))
        inputs.density_cfg.points = static_cast<int>(*qp);
    return inputs;
}

Problem make_problem(const ProblemInputs& inputs, std::string source) {
    inputs.model.class_params.check();
    StationaryDensity density(inputs.model, inputs.density_cfg);
    RewardSpec reward = [&] {
        if (inputs.M1 || inputs.M2) {
            const double m1 = inputs.M1.value_or(
                0.5 * expected_hitting_time(density, inputs.y0, inputs.y1));
            const double m2 = inputs.M2.value_or(
                2.0 * expected_hitting_time(density, inputs.y0, inputs.beta));
            return RewardSpec(inputs.g, inputs.y0, inputs.y1, inputs.beta, m1, m2);
        }
        return RewardSpec::with_default_bounds(inputs.g, inputs.y0, inputs.y1, inputs.beta,
                                               density);
    }();
    Problem problem{inputs.model, std::move(density), std::move(reward), 1.0, 1e-3,
                    std::move(source)};
    if (inputs.m) problem.exploration_m = *inputs.m;
    if (inputs.floor_a) problem.floor_a = *inputs.floor_a;
    if (!(problem.exploration_m > 0.0)) throw ValidationError("problem: need m > 0");
    if (!(problem.floor_a > 0.0)) throw ValidationError("problem: need a > 0");
    return problem;
}

Problem load_problem(const std::string& file) {
    return make_problem(parse_problem_file(file), file);
}

}  // namespace impulse
