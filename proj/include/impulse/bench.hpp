#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "impulse/control.hpp"

namespace impulse {

enum class Pipeline { density_risk, threshold_regret, strategy_regret, oracle_check };

std::string pipeline_name(Pipeline p);
Pipeline parse_pipeline(const std::string& name);

/// One experiment: a (horizon x replication) grid over a problem file with
/// per-cell derived seeds. Identical plan + master seed gives a
/// byte-identical report.
struct ExperimentPlan {
    std::string problem_file;
    Pipeline pipeline = Pipeline::threshold_regret;
    std::vector<double> horizons;   // strictly increasing
    int replications = 2;           // >= 2
    std::uint64_t master_seed = 0;
    double dt = 1e-3;
    int grid_n = 512;
    std::optional<double> floor_a;  // density floor; defaults from the problem
    std::optional<double> floor_M1; // xi floor; defaults to the reward's M1
    std::optional<double> m;        // exploration constant; defaults from the problem
    std::optional<double> bandwidth;
    InnerLimit inner = InnerLimit::base_level;
    double risk_lo = -2.0, risk_hi = 2.0; // L1 window of the density_risk pipeline
    int threads = 0;                // 0: IMPULSE_THREADS env or hardware count
    std::string output_path;        // when set, run_experiment writes report files
};

struct CellResult {
    double T = 0.0;
    int rep = 0;
    std::uint64_t seed = 0;
    double loss = 0.0;
    bool ok = false;
    std::string error;
    double extra = 0.0; // pipeline-specific (see run_experiment)
};

struct HorizonStats {
    double T = 0.0;
    double mean = 0.0; // mean loss over succeeding replications
    double se = 0.0;
    int n = 0;         // succeeded
    int attempted = 0;
};

struct SlopeFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_se = 0.0;
    double ci_half_width = 0.0; // 1.96 * slope_se
    int points_used = 0;
    int dropped = 0; // nonpositive means excluded from the fit
};

struct RateReport {
    ExperimentPlan plan;
    std::vector<CellResult> cells;
    std::vector<HorizonStats> per_horizon;
    std::optional<SlopeFit> fit; // present when >= 3 positive horizon means
};

/// Ordinary least squares of log(mean loss) on log(T). Nonpositive losses
/// are dropped; fewer than 3 surviving points is an error.
SlopeFit fit_loglog_slope(const std::vector<std::pair<double, double>>& points);

/// Executes the plan's pipeline per (horizon, replication) cell:
///   density_risk      L1 error of the kernel estimate on [risk_lo, risk_hi]
///                     against the quadrature density
///   threshold_regret  Phi - (g/xi)(y_hat) with y_hat estimated from an
///                     uncontrolled record of length T
///   strategy_regret   Phi - realized rate of the data-driven strategy;
///                     `extra` carries T^{-2/3} S_T at the final checkpoint
///   oracle_check      |Phi - realized rate| of the threshold run at y*;
///                     `extra` carries the realized rate
/// Failed cells are flagged and excluded; more than 10% failures aborts.
RateReport run_experiment(const ExperimentPlan& plan);
RateReport run_experiment(const ExperimentPlan& plan, const Problem& problem);

/// JSON report plus summary and per-replication CSVs next to it.
void write_report(const RateReport& report, const std::string& json_path);
std::string report_to_json(const RateReport& report);

/// Worker-count resolution shared by the parallel pieces: explicit value,
/// else IMPULSE_THREADS, else the hardware count.
int resolve_threads(int requested);

/// Deterministic parallel map over [0, n); `fn` must not throw.
void parallel_for(int n, int threads, const std::function<void(int)>& fn);

}  // namespace impulse
