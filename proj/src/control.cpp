#include "impulse/control.hpp"

#include <algorithm>
#include <fstream>

#include <nlohmann/json.hpp>

#include "impulse/errors.hpp"
#include "impulse/rng.hpp"

namespace impulse {

namespace {

using nlohmann::json;

RunMeta base_meta(const DiffusionModel& model, const RewardSpec& reward, double T, double dt,
                  std::uint64_t seed) {
    RunMeta meta;
    meta.drift = model.drift.spec();
    meta.sigma = model.sigma.spec();
    meta.reward = reward.g().spec();
    meta.class_params = model.class_params;
    meta.y0 = reward.y0();
    meta.y1 = reward.y1();
    meta.beta = reward.beta();
    meta.M1 = reward.floor_M1();
    meta.M2 = reward.cap_M2();
    meta.T = T;
    meta.dt = dt;
    meta.seed = seed;
    return meta;
}

void check_horizon(double T, double dt) {
    if (!(T > 0.0) || !(dt > 0.0) || dt > T)
        throw std::invalid_argument("controlled run: need 0 < dt <= T");
}

}  // namespace

ControlledRun run_threshold_strategy(const DiffusionModel& model, const RewardSpec& reward,
                                     const ThresholdStrategy& strategy, double T, double dt,
                                     std::uint64_t seed) {
    check_horizon(T, dt);
    if (strategy.y_cut < reward.y1() || strategy.y_cut > reward.beta())
        throw std::invalid_argument("threshold strategy: y_cut outside [y1, beta]");

    ControlledRun run;
    run.meta = base_meta(model, reward, T, dt, seed);
    run.meta.strategy = "threshold";
    run.meta.y_cut = strategy.y_cut;
    run.dt = dt;
    run.seed = seed;

    const auto total_steps = static_cast<long long>(std::floor(T / dt + 1e-9));
    run.total_time = static_cast<double>(total_steps) * dt;
    run.threshold_history.push_back({0.0, strategy.y_cut});
    run.exploration_checkpoints.push_back({0.0, 0.0});

    NormalSampler normal(seed);
    const double sqrt_dt = std::sqrt(dt);
    double x = reward.y0();
    for (long long k = 1; k <= total_steps; ++k) {
        x += model.drift(x) * dt + model.sigma(x) * sqrt_dt * normal();
        if (!std::isfinite(x))
            throw SimulationError("controlled run blow-up at step " + std::to_string(k),
                                  static_cast<std::size_t>(k - 1));
        if (x >= strategy.y_cut) {
            run.interventions.push_back(
                {static_cast<double>(k) * dt, x, reward(x), PeriodKind::exploitation});
            x = reward.y0();
        }
    }
    run.exploration_checkpoints.push_back({run.total_time, 0.0});
    return run;
}

ControlledRun run_data_driven(const DiffusionModel& model, const RewardSpec& reward,
                              const DataDrivenOptions& options, double T, double dt,
                              std::uint64_t seed) {
    check_horizon(T, dt);
    const auto& schedule = options.schedule;
    const auto& est_cfg = options.estimator;
    if (!(schedule.m > 0.0)) throw std::invalid_argument("schedule: need m > 0");
    if (schedule.initial_explorations < 0)
        throw std::invalid_argument("schedule: need initial_explorations >= 0");
    if (!(est_cfg.floor_M1 > 0.0))
        throw std::invalid_argument("estimator settings: need floor_M1 > 0");

    ControlledRun run;
    run.meta = base_meta(model, reward, T, dt, seed);
    run.meta.strategy = "data_driven";
    run.meta.m = schedule.m;
    run.meta.initial_explorations = schedule.initial_explorations;
    run.meta.floor_a = est_cfg.floor_a;
    run.meta.floor_M1 = est_cfg.floor_M1;
    run.meta.grid_n = est_cfg.grid_n;
    run.meta.inner = est_cfg.inner == InnerLimit::base_level ? "base_level" : "minus_infinity";
    run.dt = dt;
    run.seed = seed;

    const double y0 = reward.y0();
    const double beta = reward.beta();
    const auto total_steps = static_cast<long long>(std::floor(T / dt + 1e-9));
    run.total_time = static_cast<double>(total_steps) * dt;
    run.exploration_checkpoints.push_back({0.0, 0.0});

    NormalSampler normal(seed);
    const double sqrt_dt = std::sqrt(dt);
    double x = y0;
    long long k = 0;

    auto step = [&] {
        x += model.drift(x) * dt + model.sigma(x) * sqrt_dt * normal();
        ++k;
        if (!std::isfinite(x))
            throw SimulationError("controlled run blow-up at step " + std::to_string(k),
                                  static_cast<std::size_t>(k - 1));
    };

    std::vector<double> sorted_record;  // estimator view of X'
    std::vector<double> pending;        // samples since the last estimate refresh
    std::vector<double> full_record;    // only when capturing
    long long record_count = 0;
    bool estimate_stale = true;
    double threshold = reward.y1();

    auto refresh_estimate = [&] {
        if (!estimate_stale) return;
        estimate_stale = false;
        if (record_count == 0) {
            // no data yet: xi_hat is the constant floor M1
            auto best = detail::grid_argmax([&](double y) { return reward(y) / est_cfg.floor_M1; },
                                            reward.y1(), beta, est_cfg.grid_n);
            threshold = best.x;
            return;
        }
        const std::size_t old_size = sorted_record.size();
        sorted_record.insert(sorted_record.end(), pending.begin(), pending.end());
        pending.clear();
        std::sort(sorted_record.begin() + static_cast<std::ptrdiff_t>(old_size),
                  sorted_record.end());
        std::inplace_merge(sorted_record.begin(),
                           sorted_record.begin() + static_cast<std::ptrdiff_t>(old_size),
                           sorted_record.end());
        const double duration = static_cast<double>(record_count) * dt;
        const double h = est_cfg.bandwidth.value_or(default_bandwidth(duration));
        Eigen::ArrayXd sorted = Eigen::Map<const Eigen::ArrayXd>(
            sorted_record.data(), static_cast<Eigen::Index>(sorted_record.size()));
        auto density =
            DensityEstimate::kernel_from_sorted(std::move(sorted), dt, duration,
                                                est_cfg.kernel, h);
        HittingTimeEstimateConfig cfg;
        cfg.x_max = beta;
        cfg.inner = est_cfg.inner;
        cfg.nodes = est_cfg.quad_nodes;
        auto xi_hat = build_hitting_time_estimate(density, model.sigma, y0, est_cfg.floor_a,
                                                  est_cfg.floor_M1, cfg);
        threshold = estimate_threshold(xi_hat, reward, est_cfg.grid_n).y;
    };

    int period = 0;
    while (k < total_steps) {
        const double t = static_cast<double>(k) * dt;
        const double S = static_cast<double>(record_count) * dt;
        const bool explore = period < schedule.initial_explorations ||
                             S < schedule.m * std::pow(t, ExplorationSchedule::exponent);
        if (explore) {
            const long long period_start = k;
            bool reached_beta = false, done = false;
            while (k < total_steps) {
                if (static_cast<double>(k - period_start) * dt > schedule.max_period_time)
                    throw RunawayExplorationError(
                        "exploration period exceeded its time cap; is beta reachable?");
                pending.push_back(x);
                if (options.capture_exploration_record) full_record.push_back(x);
                ++record_count;
                step();
                if (!reached_beta && x >= beta) {
                    reached_beta = true;
                } else if (reached_beta && x <= y0) {
                    done = true;
                    break;
                }
            }
            if (done) {
                // the crossing sample sits at or just below y0; the period
                // ends with a zero-reward impulse back to the base level
                x = y0;
                const double t_end = static_cast<double>(k) * dt;
                run.interventions.push_back({t_end, y0, 0.0, PeriodKind::exploration});
                run.exploration_segments.emplace_back(static_cast<double>(period_start) * dt,
                                                      t_end);
                run.exploration_checkpoints.push_back(
                    {t_end, static_cast<double>(record_count) * dt});
                estimate_stale = true;
                ++period;
            }
        } else {
            refresh_estimate();
            run.threshold_history.push_back({t, threshold});
            bool crossed = false;
            while (k < total_steps) {
                step();
                if (x >= threshold) {
                    crossed = true;
                    break;
                }
            }
            if (crossed) {
                const double t_hit = static_cast<double>(k) * dt;
                run.interventions.push_back({t_hit, x, reward(x), PeriodKind::exploitation});
                x = y0;
                run.exploration_checkpoints.push_back(
                    {t_hit, static_cast<double>(record_count) * dt});
                ++period;
            }
        }
    }
    const double S_final = static_cast<double>(record_count) * dt;
    if (run.exploration_checkpoints.back().t < run.total_time - 0.5 * dt)
        run.exploration_checkpoints.push_back({run.total_time, S_final});
    if (options.capture_exploration_record)
        run.exploration_record = Eigen::Map<const Eigen::ArrayXd>(
            full_record.data(), static_cast<Eigen::Index>(full_record.size()));
    return run;
}

double average_reward(const ControlledRun& run) {
    if (!(run.total_time > 0.0)) throw std::invalid_argument("average_reward: empty run");
    double sum = 0.0;
    for (const auto& iv : run.interventions) sum += iv.reward;
    return sum / run.total_time;
}

double regret(const DiffusionModel& model, const RewardSpec& reward, const ControlledRun& run,
              int grid_n) {
    return solve_oracle(model, reward, grid_n).phi - average_reward(run);
}

// -- JSON ------------------------------------------------------------------

std::string to_json(const ControlledRun& run) {
    json meta{{"drift", run.meta.drift},
              {"sigma", run.meta.sigma},
              {"reward", run.meta.reward},
              {"lin_growth_C", run.meta.class_params.lin_growth_C},
              {"recurrence_A", run.meta.class_params.recurrence_A},
              {"recurrence_gamma", run.meta.class_params.recurrence_gamma},
              {"sigma_lower", run.meta.class_params.sigma_lower},
              {"sigma_upper", run.meta.class_params.sigma_upper},
              {"y0", run.meta.y0},
              {"y1", run.meta.y1},
              {"beta", run.meta.beta},
              {"M1", run.meta.M1},
              {"M2", run.meta.M2},
              {"T", run.meta.T},
              {"dt", run.meta.dt},
              {"seed", run.meta.seed},
              {"strategy", run.meta.strategy}};
    if (run.meta.strategy == "threshold") {
        meta["y_cut"] = run.meta.y_cut;
    } else {
        meta["m"] = run.meta.m;
        meta["initial_explorations"] = run.meta.initial_explorations;
        meta["a"] = run.meta.floor_a;
        meta["estimator_M1"] = run.meta.floor_M1;
        meta["grid_n"] = run.meta.grid_n;
        meta["inner"] = run.meta.inner;
    }

    json interventions = json::array();
    for (const auto& iv : run.interventions)
        interventions.push_back(
            {{"t", iv.t},
             {"x_pre", iv.x_pre},
             {"reward", iv.reward},
             {"kind", iv.kind == PeriodKind::exploration ? "exploration" : "exploitation"}});

    json thresholds = json::array();
    for (const auto& rec : run.threshold_history)
        thresholds.push_back({{"t", rec.t}, {"y", rec.y}});

    json checkpoints = json::array();
    for (const auto& cp : run.exploration_checkpoints)
        checkpoints.push_back({{"t", cp.t}, {"S", cp.exploration_time}});

    json doc{{"run_meta", std::move(meta)},
             {"interventions", std::move(interventions)},
             {"threshold_history", std::move(thresholds)},
             {"exploration_checkpoints", std::move(checkpoints)}};
    return doc.dump(2) + "\n";
}

void write_run_json(const ControlledRun& run, const std::string& file) {
    std::ofstream out(file);
    if (!out) throw std::runtime_error("cannot open '" + file + "' for writing");
    out << to_json(run);
    if (!out) throw std::runtime_error("short write to '" + file + "'");
}

ControlledRun read_run_json(const std::string& file) {
    std::ifstream in(file);
    if (!in) throw std::runtime_error("cannot open '" + file + "'");
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw ValidationError("'" + file + "' is not a run document: " + e.what());
    }
    ControlledRun run;
    const auto& meta = doc.at("run_meta");
    run.meta.drift = meta.at("drift").get<std::string>();
    run.meta.sigma = meta.at("sigma").get<std::string>();
    run.meta.reward = meta.at("reward").get<std::string>();
    run.meta.class_params.lin_growth_C = meta.at("lin_growth_C").get<double>();
    run.meta.class_params.recurrence_A = meta.at("recurrence_A").get<double>();
    run.meta.class_params.recurrence_gamma = meta.at("recurrence_gamma").get<double>();
    run.meta.class_params.sigma_lower = meta.at("sigma_lower").get<double>();
    run.meta.class_params.sigma_upper = meta.at("sigma_upper").get<double>();
    run.meta.y0 = meta.at("y0").get<double>();
    run.meta.y1 = meta.at("y1").get<double>();
    run.meta.beta = meta.at("beta").get<double>();
    run.meta.M1 = meta.at("M1").get<double>();
    run.meta.M2 = meta.at("M2").get<double>();
    run.meta.T = meta.at("T").get<double>();
    run.meta.dt = meta.at("dt").get<double>();
    run.meta.seed = meta.at("seed").get<std::uint64_t>();
    run.meta.strategy = meta.at("strategy").get<std::string>();
    if (meta.contains("y_cut")) run.meta.y_cut = meta.at("y_cut").get<double>();
    if (meta.contains("m")) run.meta.m = meta.at("m").get<double>();
    if (meta.contains("inner")) run.meta.inner = meta.at("inner").get<std::string>();
    run.dt = run.meta.dt;
    run.seed = run.meta.seed;
    run.total_time = run.meta.T;
    for (const auto& iv : doc.at("interventions"))
        run.interventions.push_back({iv.at("t").get<double>(), iv.at("x_pre").get<double>(),
                                     iv.at("reward").get<double>(),
                                     iv.at("kind").get<std::string>() == "exploration"
                                         ? PeriodKind::exploration
                                         : PeriodKind::exploitation});
    for (const auto& rec : doc.at("threshold_history"))
        run.threshold_history.push_back({rec.at("t").get<double>(), rec.at("y").get<double>()});
    for (const auto& cp : doc.at("exploration_checkpoints"))
        run.exploration_checkpoints.push_back(
            {cp.at("t").get<double>(), cp.at("S").get<double>()});
    return run;
}

}  // namespace impulse
