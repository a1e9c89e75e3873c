// impulse: solve, simulate, estimate and benchmark threshold-harvesting
// problems on scalar ergodic diffusions.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "impulse/bench.hpp"
#include "impulse/errors.hpp"

namespace {

using namespace impulse;

bool ends_with(const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

void print_kv(const char* key, double value) { std::printf("%s=%.10g\n", key, value); }

void write_profile_csv(const std::string& file, const Problem& problem,
                       const OracleSolution& sol) {
    std::ofstream out(file);
    if (!out) throw std::runtime_error("cannot open '" + file + "' for writing");
    out << "# problem=" << problem.source_file << "\n";
    out << "# drift=" << problem.model.drift.spec() << " sigma=" << problem.model.sigma.spec()
        << "\n";
    out << "# phi=" << sol.phi << " y_star=" << sol.y_star << "\n";
    out << "y,g,xi,g_over_xi\n";
    HittingTimeCurve xi(problem.density, problem.reward.y0(), problem.reward.beta());
    char buf[160];
    for (Eigen::Index i = 0; i < sol.grid.size(); ++i) {
        const double y = sol.grid[i];
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g\n", y, problem.reward(y),
                      xi(y), sol.rate[i]);
        out << buf;
    }
}

void write_estimate_csv(const std::string& file, const Problem& problem,
                        const DensityEstimate& density, const HittingTimeEstimate& xi_hat,
                        int grid_n) {
    std::ofstream out(file);
    if (!out) throw std::runtime_error("cannot open '" + file + "' for writing");
    out << "# problem=" << problem.source_file << "\n";
    out << "# kind=" << (density.kind() == DensityEstimate::Kind::kernel ? "kernel" : "local_time")
        << " T=" << density.duration() << " smoothing=" << density.smoothing() << "\n";
    out << "x,rho_hat,xi_hat,g_over_xi\n";
    const auto& reward = problem.reward;
    char buf[160];
    for (int i = 0; i < grid_n; ++i) {
        const double x = reward.y1() + (reward.beta() - reward.y1()) * i / (grid_n - 1);
        const double xi = xi_hat(x);
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g\n", x, density(x), xi,
                      reward(x) / xi);
        out << buf;
    }
}

struct CommonFlags {
    std::string problem_file;
    double T = 1000.0;
    double dt = 1e-3;
    std::uint64_t seed = 0;
    int grid_n = 512;
};

int run(int argc, char** argv) {
    CLI::App app{"threshold harvesting on scalar diffusions: oracle solution, "
                 "simulation, nonparametric estimation, data-driven control, rate benchmarks"};
    app.require_subcommand(1);
    int verbosity = 0;
    app.add_flag("-v,--verbose", verbosity, "chatty progress on stderr");

    // solve
    auto* solve = app.add_subcommand("solve", "oracle value and threshold for a problem file");
    CommonFlags sf;
    solve->add_option("--problem", sf.problem_file, "problem definition file")->required();
    solve->add_option("--grid-n", sf.grid_n, "threshold search grid size");
    std::string solve_out = "profile.csv";
    solve->add_option("--out", solve_out, "profile CSV path");

    // simulate
    auto* simulate = app.add_subcommand("simulate", "write an uncontrolled sample path");
    CommonFlags mf;
    simulate->add_option("--problem", mf.problem_file)->required();
    simulate->add_option("--T", mf.T, "duration");
    simulate->add_option("--dt", mf.dt, "step");
    simulate->add_option("--seed", mf.seed, "RNG seed");
    double sim_x0 = std::numeric_limits<double>::quiet_NaN();
    simulate->add_option("--x0", sim_x0, "initial state (default: the problem's y0)");
    std::string sim_out = "path.bin";
    simulate->add_option("--out", sim_out, "output path (.bin or .csv)");

    // estimate
    auto* estimate = app.add_subcommand("estimate", "density/xi/threshold estimates from a path");
    CommonFlags ef;
    std::string est_path, est_out = "estimate.csv", est_kind = "kernel", est_inner = "base";
    double est_h = 0.0, est_a = 0.0, est_M1 = 0.0, est_eps = 0.0;
    estimate->add_option("--problem", ef.problem_file)->required();
    estimate->add_option("--path", est_path, "sample path file (.bin or .csv)")->required();
    estimate->add_option("--bandwidth", est_h, "kernel bandwidth (default T^{-1/2})");
    estimate->add_option("--eps", est_eps, "local-time band (default max(2 dt s^2, sqrt(dt)))");
    estimate->add_option("--a", est_a, "density floor (default from problem)");
    estimate->add_option("--M1", est_M1, "xi floor (default from problem)");
    estimate->add_option("--grid-n", ef.grid_n);
    estimate->add_option("--estimator", est_kind, "kernel | local_time");
    estimate->add_option("--inner", est_inner, "base | inf: lower limit of the mass integral");
    estimate->add_option("--out", est_out, "table CSV path");

    // control
    auto* control = app.add_subcommand("control", "run a controlled trajectory");
    CommonFlags cf;
    cf.T = 10000.0;
    std::string ctl_strategy = "data-driven", ctl_out = "run.json", ctl_inner = "base";
    double ctl_m = 0.0, ctl_a = 0.0, ctl_M1 = 0.0, ctl_ycut = 0.0, ctl_h = 0.0;
    control->add_option("--problem", cf.problem_file)->required();
    control->add_option("--T", cf.T);
    control->add_option("--dt", cf.dt);
    control->add_option("--seed", cf.seed);
    control->add_option("--strategy", ctl_strategy,
                        "data-driven | oracle | threshold (with --y-cut)");
    control->add_option("--y-cut", ctl_ycut, "threshold for --strategy threshold");
    control->add_option("--m", ctl_m, "exploration budget constant (default from problem)");
    control->add_option("--a", ctl_a);
    control->add_option("--M1", ctl_M1);
    control->add_option("--bandwidth", ctl_h, "fixed kernel bandwidth (default S^{-1/2})");
    control->add_option("--grid-n", cf.grid_n);
    control->add_option("--inner", ctl_inner, "base | inf");
    control->add_option("--out", ctl_out, "run JSON path");

    // bench
    auto* bench = app.add_subcommand("bench", "horizon/replication sweep with a rate fit");
    CommonFlags bf;
    std::string bench_pipeline = "threshold_regret", bench_out = "report.json",
                bench_inner = "base";
    std::vector<double> bench_horizons{250.0, 1000.0, 4000.0};
    int bench_reps = 10, bench_threads = 0;
    double bench_m = 0.0, bench_a = 0.0, bench_M1 = 0.0, bench_h = 0.0;
    double bench_risk_lo = -2.0, bench_risk_hi = 2.0;
    bench->add_option("--problem", bf.problem_file)->required();
    bench->add_option("--pipeline", bench_pipeline,
                      "density_risk | threshold_regret | strategy_regret | oracle_check");
    bench->add_option("--horizons", bench_horizons, "T values, strictly increasing")
        ->delimiter(',');
    bench->add_option("--reps", bench_reps, "replications per horizon");
    bench->add_option("--seed", bf.seed, "master seed");
    bench->add_option("--dt", bf.dt);
    bench->add_option("--grid-n", bf.grid_n);
    bench->add_option("--m", bench_m);
    bench->add_option("--a", bench_a);
    bench->add_option("--M1", bench_M1);
    bench->add_option("--bandwidth", bench_h);
    bench->add_option("--inner", bench_inner, "base | inf");
    bench->add_option("--risk-lo", bench_risk_lo);
    bench->add_option("--risk-hi", bench_risk_hi);
    bench->add_option("--threads", bench_threads, "0: IMPULSE_THREADS env or hardware");
    bench->add_option("--out", bench_out, "report JSON path");

    CLI11_PARSE(app, argc, argv);

    auto parse_inner = [](const std::string& s) {
        if (s == "base" || s == "base_level") return InnerLimit::base_level;
        if (s == "inf" || s == "minus_infinity") return InnerLimit::minus_infinity;
        throw ValidationError("--inner must be 'base' or 'inf'");
    };

    if (solve->parsed()) {
        Problem problem = load_problem(sf.problem_file);
        auto sol = solve_oracle(problem.density, problem.reward, sf.grid_n);
        write_profile_csv(solve_out, problem, sol);
        print_kv("phi", sol.phi);
        print_kv("y_star", sol.y_star);
        std::printf("profile=%s\n", solve_out.c_str());
        return 0;
    }

    if (simulate->parsed()) {
        Problem problem = load_problem(mf.problem_file);
        const double x0 = std::isnan(sim_x0) ? problem.reward.y0() : sim_x0;
        auto path = simulate_path(problem.model, x0, mf.T, mf.dt, mf.seed);
        if (ends_with(sim_out, ".csv"))
            write_path_csv(path, sim_out);
        else
            write_path_binary(path, sim_out);
        std::printf("path=%s\n", sim_out.c_str());
        print_kv("n", static_cast<double>(path.values.size()));
        print_kv("T", path.duration());
        return 0;
    }

    if (estimate->parsed()) {
        Problem problem = load_problem(ef.problem_file);
        SamplePath path = ends_with(est_path, ".csv") ? read_path_csv(est_path)
                                                      : read_path_binary(est_path);
        DensityEstimate density = [&] {
            if (est_kind == "kernel") {
                const double h = est_h > 0.0 ? est_h : default_bandwidth(path.duration());
                return DensityEstimate::kernel(path, KernelSpec::epanechnikov(), h);
            }
            if (est_kind == "local_time") {
                const double eps = est_eps > 0.0
                                       ? est_eps
                                       : default_local_time_band(path, problem.model.sigma);
                return DensityEstimate::local_time(path, eps, problem.model.sigma);
            }
            throw ValidationError("--estimator must be 'kernel' or 'local_time'");
        }();
        if (density.resolution_warning())
            std::fprintf(stderr,
                         "warning=bandwidth_resolution msg=\"smoothing %.3g is under twice the "
                         "sampling step; the estimate is discretization-dominated\"\n",
                         density.smoothing());
        HittingTimeEstimateConfig cfg;
        cfg.x_max = problem.reward.beta();
        cfg.inner = parse_inner(est_inner);
        auto xi_hat = build_hitting_time_estimate(
            density, problem.model.sigma, problem.reward.y0(),
            est_a > 0.0 ? est_a : problem.floor_a,
            est_M1 > 0.0 ? est_M1 : problem.reward.floor_M1(), cfg);
        auto th = estimate_threshold(xi_hat, problem.reward, ef.grid_n);
        write_estimate_csv(est_out, problem, density, xi_hat, ef.grid_n);
        print_kv("y_hat", th.y);
        print_kv("value_hat", th.value);
        std::printf("table=%s\n", est_out.c_str());
        return 0;
    }

    if (control->parsed()) {
        Problem problem = load_problem(cf.problem_file);
        ControlledRun run = [&] {
            if (ctl_strategy == "oracle") {
                auto sol = solve_oracle(problem.density, problem.reward, cf.grid_n);
                return run_threshold_strategy(problem.model, problem.reward, {sol.y_star},
                                              cf.T, cf.dt, cf.seed);
            }
            if (ctl_strategy == "threshold") {
                if (ctl_ycut == 0.0)
                    throw ValidationError("--strategy threshold needs --y-cut");
                return run_threshold_strategy(problem.model, problem.reward, {ctl_ycut}, cf.T,
                                              cf.dt, cf.seed);
            }
            if (ctl_strategy == "data-driven") {
                DataDrivenOptions options;
                options.schedule.m = ctl_m > 0.0 ? ctl_m : problem.exploration_m;
                options.estimator.floor_a = ctl_a > 0.0 ? ctl_a : problem.floor_a;
                options.estimator.floor_M1 =
                    ctl_M1 > 0.0 ? ctl_M1 : problem.reward.floor_M1();
                options.estimator.grid_n = cf.grid_n;
                options.estimator.inner = parse_inner(ctl_inner);
                if (ctl_h > 0.0) options.estimator.bandwidth = ctl_h;
                return run_data_driven(problem.model, problem.reward, options, cf.T, cf.dt,
                                       cf.seed);
            }
            throw ValidationError("--strategy must be data-driven, oracle or threshold");
        }();
        write_run_json(run, ctl_out);
        const double rate = average_reward(run);
        print_kv("rate", rate);
        auto sol = solve_oracle(problem.density, problem.reward, cf.grid_n);
        print_kv("regret", sol.phi - rate);
        print_kv("interventions", static_cast<double>(run.interventions.size()));
        print_kv("S_T", run.exploration_checkpoints.back().exploration_time);
        std::printf("out=%s\n", ctl_out.c_str());
        return 0;
    }

    if (bench->parsed()) {
        ExperimentPlan plan;
        plan.problem_file = bf.problem_file;
        plan.pipeline = parse_pipeline(bench_pipeline);
        plan.horizons = bench_horizons;
        plan.replications = bench_reps;
        plan.master_seed = bf.seed;
        plan.dt = bf.dt;
        plan.grid_n = bf.grid_n;
        if (bench_m > 0.0) plan.m = bench_m;
        if (bench_a > 0.0) plan.floor_a = bench_a;
        if (bench_M1 > 0.0) plan.floor_M1 = bench_M1;
        if (bench_h > 0.0) plan.bandwidth = bench_h;
        plan.inner = parse_inner(bench_inner);
        plan.risk_lo = bench_risk_lo;
        plan.risk_hi = bench_risk_hi;
        plan.threads = bench_threads;
        plan.output_path = bench_out;
        auto report = run_experiment(plan);
        std::printf("report=%s\n", bench_out.c_str());
        for (const auto& s : report.per_horizon) {
            std::printf("T=%.10g mean_loss=%.10g se=%.10g n=%d\n", s.T, s.mean, s.se, s.n);
        }
        if (report.fit) {
            print_kv("slope", report.fit->slope);
            print_kv("slope_ci_half_width", report.fit->ci_half_width);
        }
        return 0;
    }
    return 1;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const impulse::ValidationError& e) {
        std::fprintf(stderr, "error=validation msg=\"%s\"\n", e.what());
        return 2;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error=validation msg=\"%s\"\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error=runtime msg=\"%s\"\n", e.what());
        return 3;
    }
}
