#include <catch_amalgamated.hpp>

#include "fuelctrl/oneshot.hpp"
#include "test_util.hpp"

using namespace fuelctrl;

namespace {

Problem vshape() { return make_problem(0.5 * (lambda_dagger(1, 1) + 1.0), 1.0, 1.0); }
Problem vlambda() { return make_problem(0.5 * (lambda_star(1, 1) + lambda_dagger(1, 1)), 1.0, 1.0); }

// Test-side oracle: projected-SOR value iteration for the 1-D discounted
// stopping problem  V = min(psi, wait(V))  on an x-lattice.
std::vector<double> stopping_dp(const Problem& P, const std::function<double(double)>& psi,
                                double dx, double x_max, double bc_right) {
    const int n = static_cast<int>(std::round(x_max / dx));
    std::vector<double> v(n + 1), ps(n + 1);
    for (int i = 0; i <= n; ++i) {
        ps[i] = psi(i * dx);
        v[i] = ps[i];
    }
    v[n] = std::min(ps[n], bc_right);
    const double dt = dx * dx, disc = 1.0 + P.alpha() * dt;
    const double om = 2.0 / (1.0 + std::sqrt(std::sin(M_PI / n) * std::sin(M_PI / n) +
                                             2.0 * P.alpha() * dt));
    double sup = 1.0;
    while (sup > 1e-10) {
        sup = 0.0;
        for (int i = 1; i < n; ++i) {
            const double w =
                (P.lambda() * (i * dx) * (i * dx) * dt + 0.5 * (v[i - 1] + v[i + 1])) / disc;
            const double nv = std::min(ps[i], (1 - om) * v[i] + om * w);
            sup = std::max(sup, std::abs(nv - v[i]));
            v[i] = nv;
        }
        for (int i = n - 1; i >= 1; --i) {
            const double w =
                (P.lambda() * (i * dx) * (i * dx) * dt + 0.5 * (v[i - 1] + v[i + 1])) / disc;
            const double nv = std::min(ps[i], (1 - om) * v[i] + om * w);
            sup = std::max(sup, std::abs(nv - v[i]));
            v[i] = nv;
        }
    }
    return v;
}

}  // namespace

TEST_CASE("no-fuel solution: C1 pasting and closed form") {
    Problem P = vshape();
    NoFuelSolution v0 = solve_V0(P);
    const double f = P.f0();
    CHECK(v0.value(f - 1e-12) == Catch::Approx(v0.value(f + 1e-12)).margin(1e-10));
    CHECK(v0.value(f) == Catch::Approx(P.delta() * f * f).margin(1e-13));
    const double dl = 2.0 * P.delta() * f;
    const double dr = -P.s2a * P.B0() * std::exp(-f * P.s2a) + 2.0 * P.lambda() / P.alpha() * f;
    CHECK(dl == Catch::Approx(dr).margin(1e-9));  // one-sided derivatives agree

    // high-cost regime: stop immediately everywhere
    NoFuelSolution hv = solve_V0(make_problem(2.0, 1.0, 1.0));
    CHECK(hv.value(1.7) == Catch::Approx(1.0 * 1.7 * 1.7));
}

TEST_CASE("no-fuel solution against the grid oracle") {
    Problem P = vshape();
    NoFuelSolution v0 = solve_V0(P);
    const double dx = 1e-3;
    const double x_hi = 4.0 * P.f0();
    const double x_max = x_hi + 8.0 / P.s2a;
    auto psi = [&](double x) { return P.delta() * x * x; };
    auto v = stopping_dp(P, psi, dx, x_max, v0.value(x_max));
    double sup = 0.0, edge = 0.0;
    const int nhi = static_cast<int>(x_hi / dx);
    for (int i = 0; i <= nhi; ++i) {
        sup = std::max(sup, std::abs(v[i] - v0.value(i * dx)));
        if (std::abs(v[i] - psi(i * dx)) < 1e-9 * (1.0 + v[i])) edge = i * dx;
    }
    CHECK(sup < 5e-3);
    CHECK(edge == Catch::Approx(P.f0()).margin(dx * 1.5));
}

TEST_CASE("tangency 12: residuals, limits, envelope oracle") {
    for (Problem P : {vshape(), vlambda()}) {
        // residuals of the 2x2 system in the transformed scale
        for (double c : {1e-3, 0.02, 0.1}) {
            auto t = solve_tangency_12(c, P);
            CHECK(std::abs(h1(t.x1, P) - Ht3(t.x2, c, P)) < 1e-10);
            CHECK(std::abs(h2(t.x1, P) - Ht4(t.x2, c, P)) < 1e-10);
            CHECK(t.x1 < P.xc(c));
            CHECK(t.x2 > P.xc(c));
            CHECK(t.x2 <= P.f0() + c);
        }
        // c -> 0: both points extrapolate to 1/(2 delta)
        const double e1 = 2.0 * solve_tangency_12(5e-4, P).x1 - solve_tangency_12(1e-3, P).x1;
        const double e2 = 2.0 * solve_tangency_12(5e-4, P).x2 - solve_tangency_12(1e-3, P).x2;
        CHECK(e1 == Catch::Approx(P.cst.x_half_delta).margin(2e-3));
        CHECK(e2 == Catch::Approx(P.cst.x_half_delta).margin(2e-3));
    }

    // numeric-envelope oracle for the linear piece endpoints
    Problem P = vshape();
    const double c = 0.05;
    auto t = solve_tangency_12(c, P);
    auto Hfun = [&](double x) { return std::exp(x * P.s2a) * h_comb(x, c, P); };
    const double x_max = std::max(P.f0(), P.cst.x_half_lambda) + c + 10.0 / P.s2a;
    auto env = convex_minorant_numeric(Hfun, P, x_max, 60000);
    REQUIRE(env.pieces.size() >= 3);
    size_t lin = 0;
    while (env.pieces[lin].kind != MinorantPiece::Kind::Linear) ++lin;
    auto [ylo, yhi] = refine_linear_piece(env, Hfun, P, lin);
    CHECK(ylo == Catch::Approx(t.y1).margin(1e-4));
    CHECK(yhi == Catch::Approx(t.y2).margin(1e-4));
}

TEST_CASE("tangency 34 exists only in the v-lambda geometry") {
    Problem P = vlambda();
    SECTION("residuals and envelope endpoints") {
        const double c = 0.05;
        auto r = solve_tangency_34(c, P);
        REQUIRE(std::holds_alternative<TangencyPair>(r));
        auto t = std::get<TangencyPair>(r);
        CHECK(std::abs(Ht3(t.x1, c, P) - Hr2s(t.x2, c, P)) < 1e-10);
        CHECK(std::abs(Ht4(t.x1, c, P) - Hr2t(t.x2, c, P)) < 1e-10);
        auto t12 = solve_tangency_12(c, P);
        CHECK(t12.x2 < t.x1);
        CHECK(t.x1 < P.f0() + c);
        CHECK(t.x2 > P.cst.x_half_lambda + 0.5 * c);

        auto Hfun = [&](double x) { return std::exp(x * P.s2a) * h_comb(x, c, P); };
        const double x_max = std::max(P.f0(), P.cst.x_half_lambda) + c + 10.0 / P.s2a;
        auto env = convex_minorant_numeric(Hfun, P, x_max, 60000);
        std::vector<size_t> lins;
        for (size_t i = 0; i < env.pieces.size(); ++i)
            if (env.pieces[i].kind == MinorantPiece::Kind::Linear) lins.push_back(i);
        REQUIRE(lins.size() == 2);
        auto [ylo, yhi] = refine_linear_piece(env, Hfun, P, lins[1]);
        CHECK(ylo == Catch::Approx(t.y1).margin(1e-4));
        CHECK(yhi == Catch::Approx(t.y2).margin(1e-4));
    }
    SECTION("limit of the inner point as c -> 0 is Psi(f0)") {
        const double x3a = std::get<TangencyPair>(solve_tangency_34(1e-3, P)).x1;
        const double x3b = std::get<TangencyPair>(solve_tangency_34(5e-4, P)).x1;
        const double x3c = std::get<TangencyPair>(solve_tangency_34(2.5e-4, P)).x1;
        (void)x3a;
        const double extrap = 2.0 * x3c - x3b;
        CHECK(extrap == Catch::Approx(P.f0()).margin(2e-3));
    }
    SECTION("typed miss in the v-shape regime") {
        auto r = solve_tangency_34(0.05, vshape());
        CHECK(std::holds_alternative<NoSecondTangent>(r));
    }
    SECTION("v-shape minorant has a single linear piece") {
        Problem Q = vshape();
        const double c = 0.05;
        auto Hfun = [&](double x) { return std::exp(x * Q.s2a) * h_comb(x, c, Q); };
        const double x_max = std::max(Q.f0(), Q.cst.x_half_lambda) + c + 10.0 / Q.s2a;
        auto env = convex_minorant_numeric(Hfun, Q, x_max, 60000);
        int lins = 0;
        for (auto& p : env.pieces)
            if (p.kind == MinorantPiece::Kind::Linear) ++lins;
        CHECK(lins == 1);
    }
}

TEST_CASE("numeric envelope: convexity and no-fuel geometry") {
    Problem P = vshape();
    SECTION("W is convex and below min(H, 0)") {
        const double c = 0.08;
        auto Hfun = [&](double x) { return std::exp(x * P.s2a) * h_comb(x, c, P); };
        const double x_max = std::max(P.f0(), P.cst.x_half_lambda) + c + 10.0 / P.s2a;
        auto env = convex_minorant_numeric(Hfun, P, x_max, 20000);
        for (size_t i = 1; i + 1 < env.W.size(); ++i) {
            const double lam = (env.y[i] - env.y[i - 1]) / (env.y[i + 1] - env.y[i - 1]);
            const double chord = (1 - lam) * env.W[i - 1] + lam * env.W[i + 1];
            CHECK(env.W[i] <= chord + 1e-9 * (1.0 + std::abs(chord)));
            CHECK(env.W[i] <= std::min(env.H[i], 0.0) + 1e-9 * (1.0 + std::abs(env.H[i])));
        }
    }
    SECTION("H_l alone: follows the obstacle then stays at B0") {
        auto Hfun = [&](double x) { return Hl(x, P); };
        auto env = convex_minorant_numeric(Hfun, P, P.f0() + 10.0 / P.s2a, 20000);
        CHECK(env.value(ScaleMap(P.alpha()).psi(P.f0() + 3.0)) ==
              Catch::Approx(P.B0()).margin(1e-6));
        // contact exactly on [1, Psi(f0)]
        for (size_t i = 0; i < env.x.size(); i += 100) {
            if (env.x[i] < P.f0() - 2e-3) CHECK(env.contact[i]);
            if (env.x[i] > P.f0() + 0.05) CHECK_FALSE(env.contact[i]);
        }
    }
    SECTION("convex non-positive input is its own minorant") {
        // H(y) = -sqrt(y) is convex, negative, with slope -> 0 from below
        auto Hfun = [&](double x) { return -ScaleMap(P.alpha()).psi_alpha(x); };
        auto env = convex_minorant_numeric(Hfun, P, 2.0, 10000);
        for (size_t i = 0; i < env.x.size(); i += 57) CHECK(env.contact[i]);
    }
}

TEST_CASE("one-shot value function") {
    Problem P = vlambda();
    const double c = 0.05;
    OneShotSolution os = solve_oneshot(c, P);
    CHECK(os.value(0.0) == 0.0);
    for (double x = 0.0; x < 3.0; x += 0.01)
        CHECK(os.value(x) <= P.delta() * x * x + 1e-12);
    // complementarity: equality on the stopping set, strict inequality inside
    auto obstacle = [&](double x) {
        return std::min(P.delta() * x * x, os.v0.value(x - c) + c);
    };
    for (double x : {0.2, 0.65, 1.2}) {
        const bool waiting = (x > os.t12.x1 && x < os.t12.x2) ||
                             (os.t34 && x > os.t34->x1 && x < os.t34->x2);
        if (waiting)
            CHECK(os.value(x) < obstacle(x) - 1e-10);
        else
            CHECK(os.value(x) == Catch::Approx(obstacle(x)).margin(1e-10));
    }

    // grid-DP oracle with the one-shot obstacle
    const double dx = 1e-3;
    const double x_hi = 3.0;
    const double x_max = x_hi + 8.0 / P.s2a;
    auto v = stopping_dp(P, obstacle, dx, x_max, os.value(x_max));
    double sup = 0.0;
    for (int i = 0; i * dx <= x_hi; ++i)
        sup = std::max(sup, std::abs(v[i] - os.value(i * dx)));
    CHECK(sup < 5e-3);

    // P_r boundary values used to bracket the tangency point
    const double yc_dist = detail::line_dist_to_Hl(Ht3(P.xc(c) * (1 + 1e-9), c, P),
                                                   Ht4(P.xc(c) * (1 + 1e-9), c, P), c, P);
    CHECK(yc_dist > 0.0);
}
