#include "impulse/bench.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "impulse/errors.hpp"
#include "impulse/quadrature.hpp"
#include "impulse/rng.hpp"

namespace impulse {

using nlohmann::json;

std::string pipeline_name(Pipeline p) {
    switch (p) {
        case Pipeline::density_risk: return "density_risk";
        case Pipeline::threshold_regret: return "threshold_regret";
        case Pipeline::strategy_regret: return "strategy_regret";
        case Pipeline::oracle_check: return "oracle_check";
    }
    return "unknown";
}

Pipeline parse_pipeline(const std::string& name) {
    if (name == "density_risk") return Pipeline::density_risk;
    if (name == "threshold_regret") return Pipeline::threshold_regret;
    if (name == "strategy_regret") return Pipeline::strategy_regret;
    if (name == "oracle_check") return Pipeline::oracle_check;
    throw ValidationError("unknown pipeline '" + name + "'");
}

int resolve_threads(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("IMPULSE_THREADS")) {
        const int n = std::atoi(env);
        if (n > 0) return n;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

void parallel_for(int n, int threads, const std::function<void(int)>& fn) {
    threads = std::min(resolve_threads(threads), n);
    if (threads <= 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    for (int t = 0; t < threads; ++t)
        pool.emplace_back([&] {
            for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
        });
    for (auto& th : pool) th.join();
}

SlopeFit fit_loglog_slope(const std::vector<std::pair<double, double>>& points) {
    std::vector<std::pair<double, double>> logs;
    int dropped = 0;
    for (const auto& [T, loss] : points) {
        if (!(T > 0.0)) throw std::invalid_argument("fit_loglog_slope: need T > 0");
        if (loss > 0.0 && std::isfinite(loss))
            logs.emplace_back(std::log(T), std::log(loss));
        else
            ++dropped;
    }
    const auto n = static_cast<int>(logs.size());
    if (n < 3)
        throw ExperimentError("fit_loglog_slope: fewer than 3 positive losses to fit");

    // OLS via the 2x2 normal equations
    Eigen::Matrix2d xtx = Eigen::Matrix2d::Zero();
    Eigen::Vector2d xty = Eigen::Vector2d::Zero();
    for (const auto& [x, y] : logs) {
        const Eigen::Vector2d row(1.0, x);
        xtx += row * row.transpose();
        xty += row * y;
    }
    const Eigen::Vector2d coef = xtx.ldlt().solve(xty);

    double ss_res = 0.0, sxx = 0.0, x_mean = 0.0;
    for (const auto& [x, y] : logs) x_mean += x;
    x_mean /= n;
    for (const auto& [x, y] : logs) {
        const double resid = y - (coef[0] + coef[1] * x);
        ss_res += resid * resid;
        sxx += (x - x_mean) * (x - x_mean);
    }
    const double var = n > 2 ? ss_res / (n - 2) : 0.0;

    SlopeFit fit;
    fit.intercept = coef[0];
    fit.slope = coef[1];
    fit.slope_se = std::sqrt(var / sxx);
    fit.ci_half_width = 1.96 * fit.slope_se;
    fit.points_used = n;
    fit.dropped = dropped;
    return fit;
}

namespace {

void check_plan(const ExperimentPlan& plan) {
    if (plan.horizons.empty()) throw ValidationError("plan: needs at least one horizon");
    for (std::size_t i = 1; i < plan.horizons.size(); ++i)
        if (!(plan.horizons[i] > plan.horizons[i - 1]))
            throw ValidationError("plan: horizons must be strictly increasing");
    if (plan.replications < 2) throw ValidationError("plan: needs replications >= 2");
    if (!(plan.dt > 0.0)) throw ValidationError("plan: needs dt > 0");
}

struct PipelineContext {
    const ExperimentPlan& plan;
    const Problem& problem;
    OracleSolution solution;
    HittingTimeCurve score; // oracle xi for scoring estimated thresholds
    KernelSpec kernel = KernelSpec::epanechnikov();
    double floor_a, floor_M1, m;
};

double run_cell(const PipelineContext& ctx, double T, std::uint64_t seed, double& extra) {
    const auto& problem = ctx.problem;
    const auto& reward = problem.reward;
    const auto& plan = ctx.plan;
    switch (plan.pipeline) {
        case Pipeline::density_risk: {
            auto path = simulate_path(problem.model, reward.y0(), T, plan.dt, seed);
            const double h = plan.bandwidth.value_or(default_bandwidth(path.duration()));
            auto est = DensityEstimate::kernel(path, ctx.kernel, h);
            return integrate(
                [&](double x) { return std::abs(est(x) - problem.density(x)); },
                plan.risk_lo, plan.risk_hi, 401);
        }
        case Pipeline::threshold_regret: {
            auto path = simulate_path(problem.model, reward.y0(), T, plan.dt, seed);
            const double h = plan.bandwidth.value_or(default_bandwidth(path.duration()));
            auto est = DensityEstimate::kernel(path, ctx.kernel, h);
            HittingTimeEstimateConfig cfg;
            cfg.x_max = reward.beta();
            cfg.inner = plan.inner;
            auto xi_hat = build_hitting_time_estimate(est, problem.model.sigma, reward.y0(),
                                                      ctx.floor_a, ctx.floor_M1, cfg);
            const double y_hat = estimate_threshold(xi_hat, reward, plan.grid_n).y;
            extra = y_hat;
            return ctx.solution.phi - reward(y_hat) / ctx.score(y_hat);
        }
        case Pipeline::strategy_regret: {
            DataDrivenOptions options;
            options.schedule.m = ctx.m;
            options.estimator.kernel = ctx.kernel;
            options.estimator.floor_a = ctx.floor_a;
            options.estimator.floor_M1 = ctx.floor_M1;
            options.estimator.grid_n = plan.grid_n;
            options.estimator.inner = plan.inner;
            options.estimator.bandwidth = plan.bandwidth;
            auto run = run_data_driven(problem.model, reward, options, T, plan.dt, seed);
            const auto& final_cp = run.exploration_checkpoints.back();
            extra = final_cp.exploration_time /
                    std::pow(final_cp.t, ExplorationSchedule::exponent);
            return ctx.solution.phi - average_reward(run);
        }
        case Pipeline::oracle_check: {
            auto run = run_threshold_strategy(problem.model, reward,
                                              {ctx.solution.y_star}, T, plan.dt, seed);
            const double rate = average_reward(run);
            extra = rate;
            return std::abs(ctx.solution.phi - rate);
        }
    }
    throw ExperimentError("unreachable pipeline");
}

}  // namespace

RateReport run_experiment(const ExperimentPlan& plan, const Problem& problem) {
    check_plan(plan);
    PipelineContext ctx{plan, problem, solve_oracle(problem.density, problem.reward, plan.grid_n),
                        HittingTimeCurve(problem.density, problem.reward.y0(),
                                         problem.reward.beta())};
    ctx.floor_a = plan.floor_a.value_or(problem.floor_a);
    ctx.floor_M1 = plan.floor_M1.value_or(problem.reward.floor_M1());
    ctx.m = plan.m.value_or(problem.exploration_m);

    const int n_horizons = static_cast<int>(plan.horizons.size());
    const int n_cells = n_horizons * plan.replications;

    RateReport report;
    report.plan = plan;
    report.cells.resize(static_cast<std::size_t>(n_cells));
    parallel_for(n_cells, plan.threads, [&](int i) {
        const int h = i / plan.replications;
        const int rep = i % plan.replications;
        CellResult& cell = report.cells[static_cast<std::size_t>(i)];
        cell.T = plan.horizons[static_cast<std::size_t>(h)];
        cell.rep = rep;
        cell.seed = derive_seed(plan.master_seed, static_cast<std::uint64_t>(i));
        cell.extra = std::numeric_limits<double>::quiet_NaN();
        try {
            cell.loss = run_cell(ctx, cell.T, cell.seed, cell.extra);
            cell.ok = true;
        } catch (const std::exception& e) {
            cell.ok = false;
            cell.loss = std::numeric_limits<double>::quiet_NaN();
            cell.error = e.what();
        }
    });

    int failed = 0;
    for (const auto& cell : report.cells)
        if (!cell.ok) ++failed;
    if (failed * 10 > n_cells)
        throw ExperimentError("experiment aborted: " + std::to_string(failed) + " of " +
                              std::to_string(n_cells) + " cells failed (> 10%)");

    std::vector<std::pair<double, double>> means;
    for (int h = 0; h < n_horizons; ++h) {
        HorizonStats stats;
        stats.T = plan.horizons[static_cast<std::size_t>(h)];
        stats.attempted = plan.replications;
        double sum = 0.0, sum_sq = 0.0;
        for (int rep = 0; rep < plan.replications; ++rep) {
            const auto& cell = report.cells[static_cast<std::size_t>(h * plan.replications + rep)];
            if (!cell.ok) continue;
            ++stats.n;
            sum += cell.loss;
            sum_sq += cell.loss * cell.loss;
        }
        if (stats.n > 0) stats.mean = sum / stats.n;
        if (stats.n > 1)
            stats.se = std::sqrt(std::max(0.0, (sum_sq - stats.n * stats.mean * stats.mean) /
                                                   (stats.n - 1)) /
                                 stats.n);
        report.per_horizon.push_back(stats);
        means.emplace_back(stats.T, stats.mean);
    }

    int positive = 0;
    for (const auto& [T, mean] : means)
        if (mean > 0.0 && std::isfinite(mean)) ++positive;
    if (positive >= 3) report.fit = fit_loglog_slope(means);

    if (!plan.output_path.empty()) write_report(report, plan.output_path);
    return report;
}

RateReport run_experiment(const ExperimentPlan& plan) {
    return run_experiment(plan, load_problem(plan.problem_file));
}

// -- report files -----------------------------------------------------------

namespace {

json plan_to_json(const ExperimentPlan& plan) {
    json j{{"problem_file", plan.problem_file},
           {"pipeline", pipeline_name(plan.pipeline)},
           {"horizons", plan.horizons},
           {"replications", plan.replications},
           {"master_seed", plan.master_seed},
           {"dt", plan.dt},
           {"grid_n", plan.grid_n},
           {"inner", plan.inner == InnerLimit::base_level ? "base_level" : "minus_infinity"},
           {"risk_lo", plan.risk_lo},
           {"risk_hi", plan.risk_hi}};
    if (plan.floor_a) j["a"] = *plan.floor_a;
    if (plan.floor_M1) j["M1"] = *plan.floor_M1;
    if (plan.m) j["m"] = *plan.m;
    if (plan.bandwidth) j["h"] = *plan.bandwidth;
    return j;
}

std::string csv_path(const std::string& json_path, const char* suffix) {
    std::string base = json_path;
    const auto dot = base.rfind(".json");
    if (dot != std::string::npos && dot == base.size() - 5) base.erase(dot);
    return base + suffix;
}

void write_provenance(std::ofstream& out, const ExperimentPlan& plan) {
    const json j = plan_to_json(plan);
    for (const auto& [key, value] : j.items()) out << "# " << key << "=" << value.dump() << "\n";
}

}  // namespace

std::string report_to_json(const RateReport& report) {
    json cells = json::array();
    for (const auto& cell : report.cells) {
        json c{{"T", cell.T}, {"rep", cell.rep}, {"seed", cell.seed}, {"ok", cell.ok}};
        if (cell.ok) {
            c["loss"] = cell.loss;
            if (std::isfinite(cell.extra)) c["extra"] = cell.extra;
        } else {
            c["error"] = cell.error;
        }
        cells.push_back(std::move(c));
    }
    json horizons = json::array();
    for (const auto& stats : report.per_horizon)
        horizons.push_back({{"T", stats.T},
                            {"mean_loss", stats.mean},
                            {"se", stats.se},
                            {"n", stats.n},
                            {"attempted", stats.attempted}});
    json doc{{"plan", plan_to_json(report.plan)},
             {"cells", std::move(cells)},
             {"per_horizon", std::move(horizons)}};
    if (report.fit)
        doc["fit"] = {{"slope", report.fit->slope},
                      {"intercept", report.fit->intercept},
                      {"slope_se", report.fit->slope_se},
                      {"ci_half_width", report.fit->ci_half_width},
                      {"points_used", report.fit->points_used},
                      {"dropped", report.fit->dropped}};
    else
        doc["fit"] = nullptr;
    return doc.dump(2) + "\n";
}

void write_report(const RateReport& report, const std::string& json_path) {
    {
        std::ofstream out(json_path);
        if (!out) throw std::runtime_error("cannot open '" + json_path + "' for writing");
        out << report_to_json(report);
    }
    {
        std::ofstream out(csv_path(json_path, "_summary.csv"));
        write_provenance(out, report.plan);
        out << "T,mean_loss,se,n\n";
        char buf[160];
        for (const auto& s : report.per_horizon) {
            std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%d\n", s.T, s.mean, s.se, s.n);
            out << buf;
        }
    }
    {
        std::ofstream out(csv_path(json_path, "_raw.csv"));
        write_provenance(out, report.plan);
        out << "T,rep,seed,loss,ok,extra\n";
        char buf[200];
        for (const auto& c : report.cells) {
            std::snprintf(buf, sizeof(buf), "%.17g,%d,%llu,%.17g,%d,%.17g\n", c.T, c.rep,
                          static_cast<unsigned long long>(c.seed), c.loss, c.ok ? 1 : 0,
                          c.extra);
            out << buf;
        }
    }
}

}  // namespace impulse
