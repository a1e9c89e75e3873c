#include <doctest.h>

#include <cstdio>

#include "impulse/errors.hpp"
#include "impulse/rng.hpp"
#include "impulse/stationary_density.hpp"
#include "oracles.hpp"

using namespace impulse;

TEST_CASE("class params reject broken constants") {
    CHECK_THROWS_AS((DriftClassParams{0.5, 1.0, 0.5, 1.0, 1.0}.check()), ValidationError);
    CHECK_THROWS_AS((DriftClassParams{1.0, 1.0, 0.5, 0.0, 1.0}.check()), ValidationError);
    CHECK_THROWS_AS((DriftClassParams{1.0, 1.0, 0.5, 2.0, 1.0}.check()), ValidationError);
    CHECK_THROWS_AS((DriftClassParams{1.0, 1.0, -0.1, 1.0, 1.0}.check()), ValidationError);
}

TEST_CASE("class validation: OU passes, outward and cubic drifts fail") {
    auto grid = Eigen::ArrayXd::LinSpaced(1001, -5.0, 5.0);

    auto ou = testref::ou_model();
    auto report = validate_class_membership(ou, grid);
    CHECK(report.passed);
    CHECK_FALSE(report.first_violation.has_value());

    DiffusionModel outward{ScalarFunction::linear(1.0), ScalarFunction::constant(1.0),
                           ou.class_params};
    report = validate_class_membership(outward, grid);
    CHECK_FALSE(report.passed);
    REQUIRE(report.first_violation.has_value());
    // sign condition breaks at the first grid point past the recurrence radius
    CHECK(std::abs(report.first_violation->x) > ou.class_params.recurrence_A);
    CHECK(report.first_violation->x == grid[0]);

    DiffusionModel cubic{ScalarFunction::polynomial({0.0, 0.0, 0.0, -2.0}),
                         ScalarFunction::constant(1.0), ou.class_params};
    report = validate_class_membership(cubic, grid);
    CHECK_FALSE(report.passed);
    REQUIRE(report.first_violation.has_value());
    CHECK(report.first_violation->message.find("C(1+|x|)") != std::string::npos);
}

TEST_CASE("class validation preconditions and descriptor errors") {
    auto ou = testref::ou_model();
    CHECK_THROWS_AS(validate_class_membership(ou, Eigen::ArrayXd()), std::invalid_argument);
    // grid not reaching past +-A
    CHECK_THROWS_AS(validate_class_membership(ou, Eigen::ArrayXd::LinSpaced(11, -0.5, 0.5)),
                    std::invalid_argument);
    DiffusionModel overflowing{ScalarFunction::linear(1e308), ScalarFunction::constant(1.0),
                               ou.class_params};
    CHECK_THROWS_AS(validate_class_membership(overflowing, 5.0), ValidationError);
}

TEST_CASE("simulate_path: Brownian increments have variance dt") {
    DiffusionModel bm{ScalarFunction::constant(0.0), ScalarFunction::constant(1.0),
                      testref::ou_model().class_params};
    const double dt = 1e-3;
    auto path = simulate_path(bm, 0.0, 100.0, dt, 99);
    const auto n = path.values.size() - 1;
    REQUIRE(n == 100000);
    Eigen::ArrayXd inc = path.values.tail(n) - path.values.head(n);
    const double mean = inc.mean();
    const double var = (inc - mean).square().sum() / static_cast<double>(n - 1);
    const double se_var = dt * std::sqrt(2.0 / static_cast<double>(n - 1));
    CHECK(std::abs(var - dt) < 3.0 * se_var);
    CHECK(std::abs(mean) < 4.0 * std::sqrt(dt / static_cast<double>(n)));
}

TEST_CASE("simulate_path: deterministic drift, length, reproducibility") {
    DiffusionModel ode{ScalarFunction::constant(1.0), ScalarFunction::constant(0.0),
                       testref::ou_model().class_params};
    auto path = simulate_path(ode, 0.0, 1.0, 0.1, 7);
    CHECK(path.values.size() == 11);
    CHECK(path.values[10] == doctest::Approx(1.0).epsilon(1e-12));

    auto ou = testref::ou_model();
    auto a = simulate_path(ou, 0.0, 5.0, 1e-3, 1234);
    auto b = simulate_path(ou, 0.0, 5.0, 1e-3, 1234);
    CHECK((a.values == b.values).all());
    auto c = simulate_path(ou, 0.0, 5.0, 1e-3, 1235);
    CHECK_FALSE((a.values == c.values).all());

    CHECK_THROWS_AS(simulate_path(ou, 0.0, 1.0, 2.0, 1), std::invalid_argument);
    CHECK_THROWS_AS(simulate_path(ou, 0.0, -1.0, 0.1, 1), std::invalid_argument);
}

TEST_CASE("simulate_path: blow-up carries the last finite index") {
    DiffusionModel exploding{ScalarFunction::polynomial({0.0, 0.0, 0.0, 1.0}),
                             ScalarFunction::constant(1.0), testref::ou_model().class_params};
    try {
        simulate_path(exploding, 3.0, 50.0, 1.0, 5);
        FAIL("expected SimulationError");
    } catch (const SimulationError& e) {
        CHECK(e.last_finite_index < 50);
    }
}

TEST_CASE("first_hitting_time: degenerate and deterministic cases") {
    auto ou = testref::ou_model();
    CHECK_THROWS_AS(first_hitting_time(ou, 1.0, 1.0, 0.1, 1, 10.0), std::invalid_argument);
    CHECK_THROWS_AS(first_hitting_time(ou, 1.0, 0.5, 0.1, 1, 10.0), std::invalid_argument);

    DiffusionModel ode{ScalarFunction::constant(1.0), ScalarFunction::constant(0.0),
                       ou.class_params};
    auto res = first_hitting_time(ode, 0.0, 1.0, 0.015625, 1, 10.0);
    CHECK(res.hit);
    CHECK(res.time == 1.0); // binary dt: the running sum reaches the level exactly
    res = first_hitting_time(ode, 0.0, 1.0, 0.01, 1, 10.0);
    CHECK(res.hit);
    CHECK(res.time == doctest::Approx(1.0).epsilon(0.02));

    // cap reached without a hit
    res = first_hitting_time(ou, 0.0, 6.0, 1e-2, 3, 2.0);
    CHECK_FALSE(res.hit);
    CHECK(res.time == 2.0);
}

TEST_CASE("hitting-time identity: MC mean matches the quadrature oracle") {
    auto ou = testref::ou_model();
    StationaryDensity rho(ou);
    const double dt = 1e-3;
    const double xi = expected_hitting_time(rho, 0.0, 1.0);
    CHECK(xi == doctest::Approx(testref::kOuXi10).epsilon(1e-7));

    const int reps = 20000;
    std::vector<double> times(static_cast<std::size_t>(reps));
    for (int i = 0; i < reps; ++i)
        times[static_cast<std::size_t>(i)] =
            first_hitting_time(ou, 0.0, 1.0, dt, derive_seed(77, static_cast<std::uint64_t>(i)),
                               10.0 * xi + 50.0)
                .time;
    auto stats = testref::mean_se(times);
    // grid-crossing detection lags the continuous hit; the O(sqrt(dt)) bias
    // scales with the hitting time itself, hence the relative allowance
    const double allowance = 4.0 * stats.se + 2.0 * std::sqrt(dt) * xi;
    CHECK(std::abs(stats.mean - xi) < allowance);
}

TEST_CASE("path files: binary round-trip is bit-exact, CSV is close") {
    auto ou = testref::ou_model();
    auto path = simulate_path(ou, 0.3, 2.0, 1e-2, 424242);
    const std::string bin = "test_path.bin";
    const std::string csv = "test_path.csv";

    write_path_binary(path, bin);
    auto back = read_path_binary(bin);
    CHECK(back.t0 == path.t0);
    CHECK(back.dt == path.dt);
    CHECK(back.seed == path.seed);
    REQUIRE(back.values.size() == path.values.size());
    CHECK((back.values == path.values).all());

    write_path_csv(path, csv);
    auto csv_back = read_path_csv(csv);
    REQUIRE(csv_back.values.size() == path.values.size());
    CHECK(csv_back.dt == doctest::Approx(path.dt));
    for (Eigen::Index i = 0; i < path.values.size(); i += 37)
        CHECK(csv_back.values[i] == path.values[i]); // %.17g round-trips doubles

    std::remove(bin.c_str());
    std::remove(csv.c_str());
    CHECK_THROWS(read_path_binary("does_not_exist.bin"));
}
