#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "impulse/estimation.hpp"

namespace impulse {

/// An exploration segment ran past its configured time cap; usually means
/// beta is unreachable in practice for this model.
struct RunawayExplorationError : std::runtime_error {
    explicit RunawayExplorationError(const std::string& what) : std::runtime_error(what) {}
};

/// Harvest whenever the state reaches y_cut, restart at the base level.
struct ThresholdStrategy {
    double y_cut = 0.0;
};

/// Exploration budget: a period boundary at time t starts an exploration
/// period while S_t < m * t^{2/3} (and unconditionally for the first
/// `initial_explorations` periods, so the first estimate has data).
struct ExplorationSchedule {
    double m = 1.0;
    int initial_explorations = 1;
    /// Cap on one exploration period's simulated duration; exceeding it
    /// raises RunawayExplorationError.
    double max_period_time = std::numeric_limits<double>::infinity();
    static constexpr double exponent = 2.0 / 3.0;
};

/// Estimator wiring for the data-driven strategy. The bandwidth defaults
/// to the T^{-1/2} rule on the exploration record's duration.
struct EstimatorSettings {
    KernelSpec kernel = KernelSpec::epanechnikov();
    double floor_a = 1e-3;
    double floor_M1 = 0.0; // required > 0
    int grid_n = 512;
    int quad_nodes = 513;
    InnerLimit inner = InnerLimit::base_level;
    std::optional<double> bandwidth; // fixed h override
};

enum class PeriodKind { exploration, exploitation };

struct Intervention {
    double t = 0.0;
    double x_pre = 0.0;  // state just before the impulse (>= y0)
    double reward = 0.0; // g(x_pre); exploration boundaries pay 0
    PeriodKind kind = PeriodKind::exploitation;
};

struct ThresholdRecord {
    double t = 0.0; // exploitation period start
    double y = 0.0; // threshold frozen for that period
};

struct Checkpoint {
    double t = 0.0;
    double exploration_time = 0.0; // S_t
};

/// Echo of everything that determined a run, written into its JSON output.
struct RunMeta {
    std::string drift, sigma, reward; // function descriptors
    DriftClassParams class_params;
    double y0 = 0.0, y1 = 0.0, beta = 0.0, M1 = 0.0, M2 = 0.0;
    double T = 0.0, dt = 0.0;
    std::uint64_t seed = 0;
    std::string strategy; // "threshold" or "data_driven"
    double y_cut = std::numeric_limits<double>::quiet_NaN();
    double m = std::numeric_limits<double>::quiet_NaN();
    int initial_explorations = 0;
    double floor_a = std::numeric_limits<double>::quiet_NaN();
    double floor_M1 = std::numeric_limits<double>::quiet_NaN();
    int grid_n = 0;
    std::string inner;
};

struct ControlledRun {
    RunMeta meta;
    std::vector<Intervention> interventions;
    std::vector<ThresholdRecord> threshold_history;
    std::vector<Checkpoint> exploration_checkpoints;
    double total_time = 0.0;
    double dt = 0.0;
    std::uint64_t seed = 0;

    // In-memory diagnostics for tests; not part of the JSON format.
    std::vector<std::pair<double, double>> exploration_segments; // completed (start, end)
    Eigen::ArrayXd exploration_record; // concatenated samples when captured
};

ControlledRun run_threshold_strategy(const DiffusionModel& model, const RewardSpec& reward,
                                     const ThresholdStrategy& strategy, double T, double dt,
                                     std::uint64_t seed);

struct DataDrivenOptions {
    ExplorationSchedule schedule;
    EstimatorSettings estimator;
    bool capture_exploration_record = false;
};

/// The paper's strategy: periods alternate between exploration (run
/// uncontrolled to beta, then back to y0; samples feed the estimator) and
/// exploitation (threshold run at the current estimate, frozen per
/// period). The threshold is re-estimated from the full exploration
/// record at the start of each exploitation period.
ControlledRun run_data_driven(const DiffusionModel& model, const RewardSpec& reward,
                              const DataDrivenOptions& options, double T, double dt,
                              std::uint64_t seed);

/// Collected reward per unit time. Finite-horizon empirical version of the
/// long-run criterion; can sit slightly above the optimum on lucky runs.
double average_reward(const ControlledRun& run);

/// Oracle value minus realized rate.
double regret(const DiffusionModel& model, const RewardSpec& reward, const ControlledRun& run,
              int grid_n = 512);

std::string to_json(const ControlledRun& run);
void write_run_json(const ControlledRun& run, const std::string& file);
ControlledRun read_run_json(const std::string& file);

}  // namespace impulse
