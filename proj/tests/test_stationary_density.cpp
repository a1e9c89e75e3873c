#include <doctest.h>

#include "impulse/errors.hpp"
#include "impulse/stationary_density.hpp"
#include "oracles.hpp"

using namespace impulse;

TEST_CASE("OU stationary density matches the closed form") {
    StationaryDensity rho(testref::ou_model());
    CHECK(rho(0.0) == doctest::Approx(testref::kGaussDensity0).epsilon(1e-8));
    CHECK(rho(1.0) / rho(0.0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-9));
    CHECK(rho(-1.3) == doctest::Approx(testref::gauss_density(1.3)).epsilon(1e-8));
    CHECK(rho.cdf(0.0) == doctest::Approx(0.5).epsilon(1e-8));
    CHECK(rho.cdf(1.0) == doctest::Approx(testref::gauss_cdf(1.0)).epsilon(1e-8));
    CHECK(rho.norm_constant() > 0.0);
    // the class tail bound forces a wide truncation radius for gamma = 0.5
    CHECK(rho.trunc_bound() > 20.0);
}

TEST_CASE("density integrates to one for every catalog model") {
    for (const auto& model : {testref::ou_model(), testref::tanh_model(), testref::sat_model()}) {
        CAPTURE(model.drift.spec());
        StationaryDensity rho(model);
        const double total = testref::adaptive_simpson(
            [&](double x) { return rho(x); }, -rho.trunc_bound(), rho.trunc_bound(), 1e-10);
        CHECK(total == doctest::Approx(1.0).epsilon(1e-6));
    }
}

TEST_CASE("density decays at least at the class tail rate") {
    for (const auto& model : {testref::ou_model(), testref::tanh_model(), testref::sat_model()}) {
        CAPTURE(model.drift.spec());
        StationaryDensity rho(model);
        const auto& p = model.class_params;
        const double ratio_bound =
            (p.sigma_upper * p.sigma_upper) / (p.sigma_lower * p.sigma_lower);
        for (double off : {1.0, 3.0, 5.0}) {
            const double x = p.recurrence_A + off;
            const double bound = rho(p.recurrence_A) * ratio_bound *
                                 std::exp(-2.0 * p.recurrence_gamma * off);
            CHECK(rho(x) <= bound * (1.0 + 1e-9));
            CHECK(rho(-x) <= rho(-p.recurrence_A) * ratio_bound *
                                 std::exp(-2.0 * p.recurrence_gamma * off) * (1.0 + 1e-9));
        }
    }
}

TEST_CASE("tail extension stays positive and decreasing beyond the truncation radius") {
    StationaryDensity rho(testref::tanh_model());
    const double R = rho.trunc_bound();
    const double inside = rho(R - 0.5);
    const double outside = rho(R + 0.5);
    CHECK(outside >= 0.0);
    CHECK(outside < inside);
}

TEST_CASE("oracle construction fails on a degenerate sigma") {
    DiffusionModel broken{ScalarFunction::linear(-1.0), ScalarFunction::constant(0.0),
                          testref::ou_model().class_params};
    CHECK_THROWS_AS(StationaryDensity{broken}, OracleError);
}

TEST_CASE("expected hitting time matches frozen closed-form values") {
    StationaryDensity rho(testref::ou_model());
    CHECK(expected_hitting_time(rho, 0.0, 0.5) == doctest::Approx(testref::kOuXi05).epsilon(1e-7));
    CHECK(expected_hitting_time(rho, 0.0, 1.0) == doctest::Approx(testref::kOuXi10).epsilon(1e-7));
    CHECK(expected_hitting_time(rho, 0.0, 1.5) == doctest::Approx(testref::kOuXi15).epsilon(1e-7));
    CHECK(expected_hitting_time(rho, 0.0, 2.0) == doctest::Approx(testref::kOuXi20).epsilon(1e-7));
    CHECK(expected_hitting_time(rho, 0.0, 0.0) == 0.0);
    CHECK_THROWS_AS(expected_hitting_time(rho, 0.0, -0.5), std::invalid_argument);
}

TEST_CASE("truncated variant drops the mass below the base level") {
    StationaryDensity rho(testref::ou_model());
    CHECK(expected_hitting_time_truncated(rho, 0.0, 1.0) ==
          doctest::Approx(testref::kOuXiTrunc10).epsilon(1e-7));
    CHECK(expected_hitting_time_truncated(rho, 0.0, 1.8) ==
          doctest::Approx(testref::kOuXiTrunc18).epsilon(1e-7));
    CHECK(expected_hitting_time_truncated(rho, 0.0, 1.0) <
          expected_hitting_time(rho, 0.0, 1.0));
}

TEST_CASE("hitting-time curve is anchored at zero and nondecreasing") {
    for (const auto& model : {testref::ou_model(), testref::tanh_model(), testref::sat_model()}) {
        CAPTURE(model.drift.spec());
        StationaryDensity rho(model);
        HittingTimeCurve xi(rho, 0.0, 2.0);
        CHECK(xi(0.0) == 0.0);
        double prev = 0.0;
        for (int i = 1; i <= 200; ++i) {
            const double value = xi(2.0 * i / 200.0);
            CHECK(value >= prev - 1e-12);
            prev = value;
        }
        CHECK_THROWS_AS(xi(-0.1), std::invalid_argument);
    }
}

TEST_CASE("min_on exposes the density floor used by estimator tests") {
    StationaryDensity rho(testref::ou_model());
    const double lowest = rho.min_on(0.5, 1.8);
    CHECK(lowest == doctest::Approx(testref::gauss_density(1.8)).epsilon(1e-6));
    CHECK(lowest > 1e-3); // the default estimator floor sits below it
}
