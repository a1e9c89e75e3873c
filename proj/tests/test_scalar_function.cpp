#include <doctest.h>

#include "impulse/errors.hpp"
#include "impulse/scalar_function.hpp"

using impulse::ScalarFunction;

TEST_CASE("builtins evaluate as declared") {
    CHECK(ScalarFunction::constant(2.5)(17.0) == 2.5);
    CHECK(ScalarFunction::linear(-1.0)(3.0) == -3.0);
    CHECK(ScalarFunction::linear(2.0, 1.0)(3.0) == 7.0);
    CHECK(ScalarFunction::polynomial({0.0, 0.0, 0.0, -2.0})(2.0) == -16.0);
    CHECK(ScalarFunction::tanh(-1.2, 1.0)(0.0) == 0.0);
    CHECK(ScalarFunction::tanh(2.0, 3.0)(1.0) == doctest::Approx(2.0 * std::tanh(3.0)));
    CHECK(ScalarFunction::capped_linear(1.8, 0.5)(1.0) == 0.5);
    CHECK(ScalarFunction::capped_linear(1.8, 0.5)(5.0) == doctest::Approx(1.3));
    CHECK(ScalarFunction::capped_log(1.6, 1.0, 0.55)(0.0) == doctest::Approx(-0.55));
}

TEST_CASE("piecewise linear interpolates and extends flat") {
    auto f = ScalarFunction::piecewise_linear({-2.0, -1.0, 1.0, 2.0}, {2.0, 1.0, -1.0, -2.0});
    CHECK(f(0.0) == doctest::Approx(0.0));
    CHECK(f(0.5) == doctest::Approx(-0.5));
    CHECK(f(1.5) == doctest::Approx(-1.5));
    CHECK(f(10.0) == -2.0);
    CHECK(f(-10.0) == 2.0);
    CHECK_THROWS_AS(ScalarFunction::piecewise_linear({1.0, 1.0}, {0.0, 1.0}),
                    impulse::ValidationError);
    CHECK_THROWS_AS(ScalarFunction::piecewise_linear({2.0, 1.0}, {0.0, 1.0}),
                    impulse::ValidationError);
}

TEST_CASE("compact polynomial vanishes outside its support") {
    auto q = ScalarFunction::compact_polynomial(0.5, {1.5, 0.0, -6.0});
    CHECK(q(0.0) == 1.5);
    CHECK(q(0.5) == doctest::Approx(0.0));
    CHECK(q(0.51) == 0.0);
    CHECK(q(-3.0) == 0.0);
}

TEST_CASE("specs round-trip through parse") {
    const char* specs[] = {
        "constant(1)",
        "linear(-1)",
        "linear(2, 0.5)",
        "polynomial(0, 0, 0, -2)",
        "tanh(-1.2, 1)",
        "pwl(-2:2, -1:1, 1:-1, 2:-2)",
        "capped_linear(1.8, 0.5)",
        "capped_log(1.6, 1, 0.55)",
        "compact_polynomial(0.5, 1.5, 0, -6)",
    };
    for (const char* spec : specs) {
        CAPTURE(spec);
        auto f = ScalarFunction::parse(spec);
        auto g = ScalarFunction::parse(f.spec());
        for (double x : {-2.3, -0.7, 0.0, 0.4, 1.9, 7.0}) CHECK(f(x) == g(x));
    }
}

TEST_CASE("malformed specs are rejected") {
    CHECK_THROWS_AS(ScalarFunction::parse("linear"), impulse::ValidationError);
    CHECK_THROWS_AS(ScalarFunction::parse("frobnicate(1)"), impulse::ValidationError);
    CHECK_THROWS_AS(ScalarFunction::parse("linear(1, 2, 3)"), impulse::ValidationError);
    CHECK_THROWS_AS(ScalarFunction::parse("linear(abc)"), impulse::ValidationError);
    CHECK_THROWS_AS(ScalarFunction::parse("pwl(1, 2)"), impulse::ValidationError);
}
