#include <catch_amalgamated.hpp>

#include "fuelctrl/model.hpp"
#include "test_util.hpp"

using namespace fuelctrl;
using testutil::Rng;

TEST_CASE("rho basics") {
    ProblemParams p{0.5, 1.0, 1.0};
    CHECK(rho(f0(p), p) == Catch::Approx(0.0).margin(1e-14));
    CHECK(rho(0.0, p) == Catch::Approx(-(0.5 / 1.0) / (1.0 - 0.5)));
    // hand evaluation of the three terms at x = 1: 1 + 2/sqrt(2) - 1 = sqrt(2)
    CHECK(rho(1.0, p) == Catch::Approx(std::sqrt(2.0)).epsilon(1e-14));
    CHECK_THROWS_AS(rho(1.0, ProblemParams{1.0, 1.0, 1.0}), std::domain_error);
}

TEST_CASE("f0 against a bisection oracle") {
    ProblemParams p{0.5, 1.0, 1.0};
    const double f0_oracle =
        testutil::bisect([&](double x) { return rho(x, p); }, 1e-12, 10.0, 1e-13);
    CHECK(f0(p) == Catch::Approx(f0_oracle).margin(1e-12));
    CHECK(f0(p) == Catch::Approx(0.5176380902050415).margin(1e-12));

    // lambda -> 0+ gives f0 -> 0
    CHECK(f0(ProblemParams{1e-12, 1.0, 1.0}) == Catch::Approx(0.0).margin(1e-10));

    // definitional consistency over random parameters
    Rng rng(7);
    for (int i = 0; i < 20; ++i) {
        const double a = rng.uniform(0.2, 5.0), d = rng.uniform(0.2, 5.0);
        const double l = rng.uniform(1e-3, 0.999) * a * d;
        ProblemParams q{l, a, d};
        CHECK(std::abs(rho(f0(q), q)) < 1e-11);
    }
    CHECK_THROWS_AS(f0(ProblemParams{2.0, 1.0, 1.0}), std::domain_error);
}

TEST_CASE("lambda_star hits f0 = 1/(2 delta)") {
    const double ls = lambda_star(1.0, 1.0);
    // oracle: bisection on f0(l) - 1/(2 delta)
    const double ls_oracle = testutil::bisect(
        [&](double l) { return f0(ProblemParams{l, 1.0, 1.0}) - 0.5; }, 1e-6, 1.0 - 1e-9);
    CHECK(ls == Catch::Approx(ls_oracle).margin(1e-10));
    CHECK(ls == Catch::Approx(0.489042).margin(1e-4));
    CHECK(f0(ProblemParams{ls, 1.0, 1.0}) == Catch::Approx(0.5).margin(1e-10));

    Rng rng(11);
    for (int i = 0; i < 100; ++i) {
        const double a = rng.uniform(0.2, 5.0), d = rng.uniform(0.2, 5.0);
        CHECK(lambda_star(a, d) < a * d);
    }
}

TEST_CASE("lambda_dagger ordering and residual") {
    const double ld = lambda_dagger(1.0, 1.0);
    CHECK(f0(ProblemParams{ld, 1.0, 1.0}) - 1.0 / (2.0 * ld) == Catch::Approx(0.0).margin(1e-10));
    // oracle: bisection on 2 l f0(l) - alpha
    const double ld_oracle = testutil::bisect(
        [&](double l) { return 2.0 * l * f0(ProblemParams{l, 1.0, 1.0}) - 1.0; },
        lambda_star(1.0, 1.0) + 1e-9, 1.0 - 1e-9);
    CHECK(ld == Catch::Approx(ld_oracle).margin(1e-10));

    Rng rng(13);
    for (int i = 0; i < 100; ++i) {
        const double a = rng.uniform(0.2, 5.0), d = rng.uniform(0.2, 5.0);
        const double ls = lambda_star(a, d), lg = lambda_dagger(a, d);
        CHECK(ls < lg);
        CHECK(lg < a * d);
    }
}

TEST_CASE("regime classification") {
    const double ls = lambda_star(1.0, 1.0), ld = lambda_dagger(1.0, 1.0);
    CHECK(classify(ProblemParams{1.0, 1.0, 1.0}) == Regime::HighCost);
    CHECK(classify(ProblemParams{1.7, 1.0, 1.0}) == Regime::HighCost);
    CHECK(classify(ProblemParams{ld, 1.0, 1.0}) == Regime::VShape);  // closed left end
    CHECK(classify(ProblemParams{0.5 * (ld + 1.0), 1.0, 1.0}) == Regime::VShape);
    CHECK(classify(ProblemParams{0.5 * (ls + ld), 1.0, 1.0}) == Regime::VLambdaShape);
    CHECK(classify(ProblemParams{ls, 1.0, 1.0}) == Regime::LegacyBelowStar);
    CHECK(classify(ProblemParams{0.1, 1.0, 1.0}) == Regime::LegacyBelowStar);

    // the inequality chain of the mid v-lambda point is realized numerically
    ProblemParams mid{0.5 * (ls + ld), 1.0, 1.0};
    auto c = regime_constants(mid);
    CHECK(c.x_half_delta < c.f0);
    CHECK(c.f0 < c.x_half_lambda);
    CHECK(inequality_chain(mid) == "1/(2*delta) < f0 < alpha/(2*lambda)");

    // boundary lambda values raise the degenerate-geometry flag
    CHECK(regime_constants(ProblemParams{ld, 1.0, 1.0}).boundary_case);
    CHECK_FALSE(regime_constants(mid).boundary_case);
}

TEST_CASE("derived constants") {
    const double ls = lambda_star(1.0, 1.0), ld = lambda_dagger(1.0, 1.0);
    ProblemParams vl{0.5 * (ls + ld), 1.0, 1.0};
    auto c = regime_constants(vl);
    CHECK(c.K > 0.0);
    CHECK(c.k > 0.0);  // k positive exactly below lambda_dagger
    CHECK(c.k < c.K);
    CHECK(c.k_bar > 0.0);
    CHECK(c.k_bar < c.K);
    CHECK(c.B0 < 0.0);

    ProblemParams vs{0.5 * (ld + 1.0), 1.0, 1.0};
    auto cv = regime_constants(vs);
    CHECK(cv.k <= 0.0);
    CHECK(cv.B0 < 0.0);

    // monotonicity of f0 in lambda over a grid
    double prev = 0.0;
    for (int i = 1; i <= 40; ++i) {
        const double l = 0.999 * i / 40.0;
        const double v = f0(ProblemParams{l, 1.0, 1.0});
        CHECK(v > prev);
        prev = v;
    }
}

TEST_CASE("rho has a single positive root") {
    Rng rng(17);
    for (int t = 0; t < 25; ++t) {
        const double a = rng.uniform(0.2, 5.0), d = rng.uniform(0.2, 5.0);
        const double l = rng.uniform(0.05, 0.95) * a * d;
        ProblemParams p{l, a, d};
        const double root = f0(p);
        for (int i = 1; i <= 20; ++i) {
            const double x = root * i / 21.0;
            CHECK(rho(x, p) < 0.0);
        }
        for (int i = 1; i <= 20; ++i) {
            const double x = root * (1.0 + i);
            CHECK(rho(x, p) > 0.0);
        }
    }
}
