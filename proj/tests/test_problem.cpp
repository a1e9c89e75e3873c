#include <doctest.h>

#include <cstdio>
#include <fstream>

#include "impulse/errors.hpp"
#include "oracles.hpp"

using namespace impulse;

TEST_CASE("reward validation enforces the payoff shape") {
    StationaryDensity rho(testref::ou_model());
    auto reward = testref::ou_reward(rho);
    CHECK(reward(reward.y0()) == 0.0);
    CHECK(reward(0.5) == 0.0);
    CHECK(reward(1.0) == 0.5);
    CHECK_THROWS_AS(reward(-0.1), std::invalid_argument);

    // g nonpositive on all of [y1, beta]
    CHECK_THROWS_AS(RewardSpec(ScalarFunction::capped_linear(1.8, 5.0), 0.0, 0.5, 1.8, 1.0, 2.0),
                    ValidationError);
    // no cost component just above y0
    CHECK_THROWS_AS(RewardSpec(ScalarFunction::linear(1.0, 1.0), 0.0, 0.5, 1.8, 1.0, 2.0),
                    ValidationError);
    // g(y) > g(beta) past beta
    CHECK_THROWS_AS(RewardSpec(ScalarFunction::linear(1.0, -0.5), 0.0, 0.5, 1.8, 1.0, 2.0),
                    ValidationError);
    // anchor ordering and xi bracket
    CHECK_THROWS_AS(RewardSpec(ScalarFunction::capped_linear(1.8, 0.5), 0.0, 1.9, 1.8, 1.0, 2.0),
                    ValidationError);
    CHECK_THROWS_AS(RewardSpec(ScalarFunction::capped_linear(1.8, 0.5), 0.0, 0.5, 1.8, 2.0, 1.0),
                    ValidationError);
    CHECK_THROWS_AS(RewardSpec(ScalarFunction::capped_linear(1.8, 0.5), 0.0, 0.5, 1.8, 0.0, 1.0),
                    ValidationError);
}

TEST_CASE("default xi bracket comes from the oracle") {
    StationaryDensity rho(testref::ou_model());
    auto reward = testref::ou_reward(rho);
    CHECK(reward.floor_M1() ==
          doctest::Approx(0.5 * expected_hitting_time(rho, 0.0, 0.5)).epsilon(1e-12));
    CHECK(reward.cap_M2() ==
          doctest::Approx(2.0 * expected_hitting_time(rho, 0.0, 1.8)).epsilon(1e-12));
    // the bracket contains xi on [y1, beta]
    CHECK(reward.floor_M1() <= expected_hitting_time(rho, 0.0, reward.y1()));
    CHECK(expected_hitting_time(rho, 0.0, reward.beta()) <= reward.cap_M2());
}

TEST_CASE("solve_oracle agrees with an independent dense search") {
    // wide OU instance: g(y) = min(y, 3) - 0.5 on [0.5, 3]
    auto model = testref::ou_model();
    StationaryDensity rho(model);
    RewardSpec reward =
        RewardSpec::with_default_bounds(ScalarFunction::capped_linear(3.0, 0.5), 0.0, 0.5, 3.0,
                                        rho);
    auto sol = solve_oracle(model, reward, 512);

    // independent route: closed-form xi via adaptive quadrature on a 10x grid
    double best_rate = -1.0, best_y = 0.0;
    for (int i = 0; i < 5120; ++i) {
        const double y = 0.5 + 2.5 * i / 5119.0;
        const double rate = (std::min(y, 3.0) - 0.5) / testref::ou_xi(y);
        if (rate > best_rate) {
            best_rate = rate;
            best_y = y;
        }
    }
    const double coarse_cell = 2.5 / 511.0;
    CHECK(std::abs(sol.y_star - best_y) <= coarse_cell + 1e-12);
    CHECK(sol.phi == doctest::Approx(best_rate).epsilon(1e-4));
    CHECK(sol.phi > 0.0);
    // no grid point beats the reported maximum
    CHECK((sol.rate <= sol.phi + 1e-15).all());
}

TEST_CASE("positive scaling moves phi, never the argmax") {
    StationaryDensity rho(testref::ou_model());
    auto g = ScalarFunction::piecewise_linear({0.0, 1.8}, {-0.5, 1.3});
    auto g2 = ScalarFunction::piecewise_linear({0.0, 1.8}, {-1.0, 2.6}); // exactly 2 g
    RewardSpec reward(g, 0.0, 0.5, 1.8, 1.0, 60.0);
    RewardSpec reward2(g2, 0.0, 0.5, 1.8, 1.0, 60.0);
    auto sol = solve_oracle(rho, reward, 512);
    auto sol2 = solve_oracle(rho, reward2, 512);
    CHECK(sol2.y_star == sol.y_star);
    CHECK(sol2.phi == 2.0 * sol.phi);
}

TEST_CASE("argmax is stable under grid refinement") {
    StationaryDensity rho(testref::ou_model());
    auto reward = testref::ou_reward(rho);
    auto coarse = solve_oracle(rho, reward, 512);
    auto fine = solve_oracle(rho, reward, 1024);
    CHECK(std::abs(fine.y_star - coarse.y_star) <= (1.8 - 0.5) / 511.0 + 1e-12);
}

TEST_CASE("threshold reward rate: anchors and domain") {
    StationaryDensity rho(testref::ou_model());
    auto reward = testref::ou_reward(rho);
    auto sol = solve_oracle(rho, reward, 512);
    CHECK(threshold_reward_rate(rho, reward, sol.y_star) ==
          doctest::Approx(sol.phi).epsilon(1e-6));
    CHECK(threshold_reward_rate(rho, reward, reward.y1()) == 0.0); // g(y1) = 0
    CHECK_THROWS_AS(threshold_reward_rate(rho, reward, 0.4), std::invalid_argument);
    CHECK_THROWS_AS(threshold_reward_rate(rho, reward, 1.9), std::invalid_argument);
}

TEST_CASE("solve_oracle insists on class membership") {
    DiffusionModel outward{ScalarFunction::linear(1.0), ScalarFunction::constant(1.0),
                           testref::ou_model().class_params};
    StationaryDensity rho(testref::ou_model());
    auto reward = testref::ou_reward(rho);
    CHECK_THROWS_AS(solve_oracle(outward, reward, 64), ValidationError);
}

static std::string write_temp(const std::string& name, const std::string& body) {
    std::ofstream out(name);
    out << body;
    return name;
}

TEST_CASE("problem files parse, default and reject unknown keys") {
    const std::string good = std::string(IMPULSE_PROBLEMS_DIR) + "/ou.toml";
    Problem problem = load_problem(good);
    CHECK(problem.model.drift.spec() == "linear(-1)");
    CHECK(problem.reward.beta() == 1.8);
    CHECK(problem.exploration_m == 1.5);
    CHECK(problem.floor_a == 1e-3);
    CHECK(problem.reward.floor_M1() ==
          doctest::Approx(0.5 * expected_hitting_time(problem.density, 0.0, 0.5)));

    auto path = write_temp("bad_key.toml",
                           "drift = linear(-1)\nsigma = constant(1)\nlin_growth_C = 1\n"
                           "recurrence_A = 1\nrecurrence_gamma = 0.5\nsigma_lower = 1\n"
                           "sigma_upper = 1\nreward = capped_linear(1.8, 0.5)\ny0 = 0\n"
                           "y1 = 0.5\nbeta = 1.8\nsurprise = 1\n");
    CHECK_THROWS_WITH_AS(load_problem(path), doctest::Contains("unknown key"), ValidationError);

    path = write_temp("missing_key.toml", "drift = linear(-1)\n");
    CHECK_THROWS_WITH_AS(load_problem(path), doctest::Contains("missing key"), ValidationError);

    path = write_temp("dup_key.toml", "drift = linear(-1)\ndrift = linear(-2)\n");
    CHECK_THROWS_WITH_AS(load_problem(path), doctest::Contains("duplicate"), ValidationError);

    path = write_temp("bad_num.toml",
                      "drift = linear(-1)\nsigma = constant(1)\nlin_growth_C = honk\n");
    CHECK_THROWS_AS(load_problem(path), ValidationError);

    std::remove("bad_key.toml");
    std::remove("missing_key.toml");
    std::remove("dup_key.toml");
    std::remove("bad_num.toml");
}

TEST_CASE("every shipped problem loads with a sane xi bracket") {
    for (const char* name : {"ou.toml", "ou_wide.toml", "tanh.toml", "sat.toml"}) {
        CAPTURE(name);
        Problem problem = load_problem(std::string(IMPULSE_PROBLEMS_DIR) + "/" + name);
        const auto& reward = problem.reward;
        const double xi_y1 = expected_hitting_time(problem.density, reward.y0(), reward.y1());
        const double xi_beta = expected_hitting_time(problem.density, reward.y0(), reward.beta());
        CHECK(reward.floor_M1() <= xi_y1);
        CHECK(xi_beta <= reward.cap_M2());
        CHECK(solve_oracle(problem.density, reward, 128).phi > 0.0);
        // overrides in the file win over the computed defaults
        CHECK(problem.exploration_m > 0.0);
    }
}
