#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <string>

#include "impulse/stationary_density.hpp"

namespace impulse {

/// Harvest payoff with its anchor levels. g(y0) is 0 by convention (a
/// zero-size impulse pays nothing); just above y0 the payoff is negative
/// (fixed intervention cost), it turns profitable at y1, and beyond beta
/// waiting can never pay more. floor_M1/cap_M2 bracket the expected
/// hitting time on [y1, beta] and feed the estimator's truncation.
class RewardSpec {
public:
    RewardSpec(ScalarFunction g, double y0, double y1, double beta, double M1, double M2);

    /// Payoff of harvesting at y (>= y0); exactly 0 at y0.
    double operator()(double y) const;

    const ScalarFunction& g() const { return g_; }
    double y0() const { return y0_; }
    double y1() const { return y1_; }
    double beta() const { return beta_; }
    double floor_M1() const { return m1_; }
    double cap_M2() const { return m2_; }

    /// Same reward with M1 = 0.5 xi(y1) and M2 = 2 xi(beta) from the
    /// model's hitting-time oracle.
    static RewardSpec with_default_bounds(ScalarFunction g, double y0, double y1, double beta,
                                          const StationaryDensity& density);

private:
    ScalarFunction g_;
    double y0_, y1_, beta_, m1_, m2_;
};

struct OracleSolution {
    double phi = 0.0;    // best reward per unit time
    double y_star = 0.0; // smallest maximizing threshold on the grid
    Eigen::ArrayXd grid; // thresholds searched
    Eigen::ArrayXd rate; // g / xi on the grid
};

/// Full-information solution: grid search of g(y)/xi(y) over [y1, beta].
/// Ties break toward the smallest threshold. Validates class membership.
OracleSolution solve_oracle(const DiffusionModel& model, const RewardSpec& reward,
                            int grid_n = 512);
/// Same search against a prebuilt density oracle (skips revalidation).
OracleSolution solve_oracle(const StationaryDensity& density, const RewardSpec& reward,
                            int grid_n = 512);

/// Long-run reward rate g(y)/xi(y) of the threshold strategy at y. Scores
/// estimated thresholds against the oracle denominator.
double threshold_reward_rate(const StationaryDensity& density, const RewardSpec& reward,
                             double y);
double threshold_reward_rate(const DiffusionModel& model, const RewardSpec& reward, double y);

namespace detail {
/// Shared grid argmax: uniform grid on [lo, hi], strictly-greater update so
/// ties resolve to the smallest abscissa. Returns (argmax, max, grid, values).
struct GridArgmax {
    double x = 0.0, value = 0.0;
    Eigen::ArrayXd grid, values;
};
GridArgmax grid_argmax(const std::function<double(double)>& f, double lo, double hi, int n);
}  // namespace detail

// -- problem files -------------------------------------------------------
//
// Flat key = value text, '#' comments, unknown keys rejected. Keys:
//   drift, sigma            function specs (see ScalarFunction)
//   lin_growth_C, recurrence_A, recurrence_gamma, sigma_lower, sigma_upper
//   reward                  function spec for g
//   y0, y1, beta
//   M1, M2                  optional xi bracket overrides
//   m                       optional exploration budget constant
//   a                       optional density floor for the estimator
//   trunc_bound, quad_points  optional quadrature overrides

struct ProblemInputs {
    DiffusionModel model;
    ScalarFunction g;
    double y0 = 0.0, y1 = 0.0, beta = 0.0;
    std::optional<double> M1, M2, m, floor_a;
    StationaryDensityConfig density_cfg;
};

ProblemInputs parse_problem_file(const std::string& file);

/// A loaded problem: model, its density oracle, the validated reward (with
/// defaulted M1/M2 when absent) and the strategy/estimator defaults.
struct Problem {
    DiffusionModel model;
    StationaryDensity density;
    RewardSpec reward;
    double exploration_m = 1.0;
    double floor_a = 1e-3;
    std::string source_file;
};

Problem load_problem(const std::string& file);
Problem make_problem(const ProblemInputs& inputs, std::string source = {});

}  // namespace impulse
