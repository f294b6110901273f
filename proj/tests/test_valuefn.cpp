#include <catch_amalgamated.hpp>

#include "fuelctrl/oneshot.hpp"
#include "fuelctrl/valuefn.hpp"
#include "test_util.hpp"

using namespace fuelctrl;
using testutil::Rng;

namespace {
PiecewiseValue& vl_pv() {
    static PiecewiseValue pv(
        solve(make_problem(0.5 * (lambda_star(1, 1) + lambda_dagger(1, 1)), 1.0, 1.0), 5.0));
    return pv;
}
PiecewiseValue& vs_pv() {
    static PiecewiseValue pv(solve(make_problem(0.5 * (lambda_dagger(1, 1) + 1.0), 1.0, 1.0), 3.0));
    return pv;
}
}  // namespace

TEST_CASE("region classification") {
    auto& pv = vl_pv();
    const auto& L = pv.solution().levels;
    const double cI = L.c_I;
    CHECK(pv.classify(0.0, 0.3).tag == Region::I);
    // a point just right of (f0, 0) sits in the lambda waiting region
    const double eps = 1e-3;
    CHECK(pv.classify(pv.problem().f0() + eps, eps / 2).tag == Region::III);
    CHECK(pv.classify(50.0, 0.3).tag == Region::IVc);
    // the band between G and Fbar acts fully
    auto sl = pv.slice(0.5 * cI);
    auto r = pv.classify(0.5 * (sl.G + sl.Fbar), 0.5 * cI);
    CHECK(r.tag == Region::IVc);
    CHECK(r.zeta == Catch::Approx(0.5 * cI));
    // on-boundary points classify into the earlier-listed closed region
    CHECK(pv.classify(sl.F, 0.5 * cI).tag == Region::I);
    CHECK(pv.classify(sl.G, 0.5 * cI).tag == Region::II);
    CHECK(pv.classify(sl.Gbar, 0.5 * cI).tag == Region::III);
}

TEST_CASE("zeta: diagonal displacement") {
    auto& pv = vl_pv();
    const auto& sol = pv.solution();
    const double cI = sol.levels.c_I;
    const double c = 0.5 * cI;
    auto sl = pv.slice(c);
    // far right: no reflecting boundary reachable
    CHECK(pv.zeta(sl.g0c + 5.0, c) == Catch::Approx(c));
    // exactly on Gbar
    CHECK(pv.zeta(sl.Gbar, c) == Catch::Approx(0.0).margin(1e-12));
    // interior of the (Gbar, g0+c) band lands on Gbar
    const double x = 0.5 * (sl.Gbar + sl.g0c);
    const double z = pv.zeta(x, c);
    CHECK(z > 0.0);
    CHECK(z < c);
    CHECK(sol.bar->Gbar(c - z) == Catch::Approx(x - z).margin(1e-9));

    // IVa landing on the reflecting part of G (v-shape, c > c_bar)
    auto& pvs = vs_pv();
    const auto& fgs = *pvs.solution().fg;
    const double c2 = 1.5 * fgs.c_bar;
    auto sl2 = pvs.slice(c2);
    const double x2 = 0.5 * (sl2.G + fgs.G_at_cbar + (c2 - fgs.c_bar));
    auto rz = pvs.classify(x2, c2);
    CHECK(rz.tag == Region::IVa);
    CHECK(fgs.G_interp(c2 - rz.zeta) == Catch::Approx(x2 - rz.zeta).margin(1e-9));
}

TEST_CASE("value assembly") {
    auto& pv = vl_pv();
    const auto& sol = pv.solution();
    // c = 0 reduces to the no-fuel closed form
    for (double x : {0.1, 0.9, 2.0}) CHECK(pv.value(x, 0.0) == Catch::Approx(sol.v0.value(x)));
    // even extension
    CHECK(pv.value(-1.1, 0.2) == Catch::Approx(pv.value(1.1, 0.2)));
    CHECK(pv.dx(-1.1, 0.2) == Catch::Approx(-pv.dx(1.1, 0.2)));
    // beyond G at small fuel in the v-shape regime: one-shot form
    auto& pvs = vs_pv();
    const double c = 0.05;
    auto sl = pvs.slice(c);
    for (double x : {sl.G + 0.05, sl.G + 0.8}) {
        CHECK(pvs.value(x, c) ==
              Catch::Approx(pvs.solution().v0.value(x - c) + c).epsilon(1e-12));
    }
    // origin pins to zero for every fuel level
    for (double cc : {0.01, 0.3, 1.0}) CHECK(pv.value(0.0, cc) == Catch::Approx(0.0).margin(1e-15));
    // dominated by the stop cost everywhere
    Rng rng(41);
    for (int i = 0; i < 200; ++i) {
        const double x = rng.uniform(0.0, 4.0), cc = rng.uniform(1e-3, 1.2);
        CHECK(pv.value(x, cc) <= pv.problem().delta() * x * x + 1e-10);
    }
}

TEST_CASE("value matches the one-shot solution below c_I") {
    // in the v-shape regime the candidate IS the one-shot value for small c
    auto& pvs = vs_pv();
    const double c = 0.04;
    OneShotSolution os = solve_oneshot(c, pvs.problem());
    for (double x = 0.0; x <= 2.5; x += 0.03)
        CHECK(pvs.value(x, c) == Catch::Approx(os.value(x)).margin(1e-9));
}

TEST_CASE("marginal U") {
    auto& pv = vl_pv();
    const auto& sol = pv.solution();
    const double cI = sol.levels.c_I;
    const double c = 0.6 * cI;
    auto sl = pv.slice(c);
    // interior of the acting region
    CHECK(pv.U(sl.g0c + 1.0, c) == Catch::Approx(1.0).margin(1e-12));
    CHECK(pv.U(0.5 * (sl.G + sl.Fbar), c) == Catch::Approx(1.0).margin(1e-12));
    // absorbing boundary: U = 2 delta F in (0,1)
    const double uF = pv.U(sl.F, c);
    CHECK(uF == Catch::Approx(2.0 * pv.problem().delta() * sl.F).margin(1e-9));
    CHECK(uF > 0.0);
    CHECK(uF < 1.0);
    // reflecting boundary: U = 1 and dU/dx = 0
    CHECK(pv.U(sl.Gbar, c) == Catch::Approx(1.0).margin(1e-8));
    CHECK(pv.dU_dx(sl.Gbar - 1e-10, sl) == Catch::Approx(0.0).margin(1e-8));
    // U stays below 1 on the waiting intervals
    for (int i = 1; i < 50; ++i) {
        const double x = sl.F + (sl.G - sl.F) * i / 50.0;
        CHECK(pv.U(x, sl) <= 1.0 + 1e-10);
    }
    for (int i = 1; i < 50; ++i) {
        const double x = sl.Fbar + (sl.Gbar - sl.Fbar) * i / 50.0;
        CHECK(pv.U(x, sl) <= 1.0 + 1e-10);
    }
}

TEST_CASE("Feynman-Kac residual on the waiting regions") {
    auto& pv = vl_pv();
    const double c = 0.4 * pv.solution().levels.c_I;
    auto sl = pv.slice(c);
    for (double t : {0.15, 0.5, 0.85}) {
        const double x2 = sl.F + (sl.G - sl.F) * t;
        const double x3 = sl.Fbar + (sl.Gbar - sl.Fbar) * t;
        for (double x : {x2, x3}) {
            CHECK(pv.generator_residual(x, sl) == 0.0);
            // finite-difference confirmation
            auto V = [&](double u) { return pv.value(u, sl); };
            const double h = 2e-4;
            const double qxx =
                (-V(x + 2 * h) + 16 * V(x + h) - 30 * V(x) + 16 * V(x - h) - V(x - 2 * h)) /
                (12 * h * h);
            const double res = 0.5 * qxx - pv.problem().alpha() * V(x) +
                               pv.problem().lambda() * x * x;
            CHECK(std::abs(res) < 1e-7 * (1.0 + std::abs(V(x))));
        }
    }
}

TEST_CASE("acting-region supersolution residual") {
    auto& pv = vl_pv();
    const auto& sol = pv.solution();
    const double c = 0.5 * sol.levels.c_I;
    auto sl = pv.slice(c);
    // IVb: residual equals 2 l z (land - a/2l) + l z^2 >= 0
    const double x = 0.5 * (sl.Gbar + sl.g0c);
    auto r = pv.classify(x, c);
    REQUIRE(r.tag == Region::IVb);
    const double land = x - r.zeta;
    const double expect = 2.0 * pv.problem().lambda() * r.zeta *
                              (land - pv.problem().cst.x_half_lambda) +
                          pv.problem().lambda() * r.zeta * r.zeta;
    CHECK(pv.generator_residual(x, sl) == Catch::Approx(expect));
    CHECK(expect >= 0.0);
    // region I closed form
    CHECK(pv.generator_residual(0.2, sl) ==
          Catch::Approx(pv.problem().delta() +
                        (pv.problem().lambda() - pv.problem().alpha() * pv.problem().delta()) *
                            0.04));
}

TEST_CASE("hstar_r branches and convexity") {
    auto& pv = vl_pv();
    const auto& sol = pv.solution();
    const Problem& P = pv.problem();
    const double c = sol.levels.c_I * 1.8;
    const double D = sol.bar->D(c), hi = sol.bar->g0 + c;
    // matches h_r outside the middle band
    CHECK(pv.hstar_r(D - 0.05, c) == Catch::Approx(h_r(D - 0.05, c, P)));
    CHECK(pv.hstar_r(hi + 0.3, c) == Catch::Approx(h_r(hi + 0.3, c, P)));
    // C1 pasting at the band edges
    const double e = 1e-6;
    CHECK(pv.hstar_r(D + e, c) == Catch::Approx(pv.hstar_r(D - e, c)).margin(1e-4 * e + 1e-10));
    CHECK(pv.hstar_r(hi - e, c) == Catch::Approx(pv.hstar_r(hi + e, c)).margin(1e-4 * e + 1e-10));
    // transformed H_r* is convex across the band: discrete second differences
    ScaleMap sm(P.alpha());
    const double lo = P.xc(c) * 1.02, hiq = hi + 1.5;
    std::vector<double> ys, Hs;
    for (int i = 0; i <= 400; ++i) {
        const double x = lo + (hiq - lo) * i / 400.0;
        ys.push_back(sm.psi(x));
        Hs.push_back(std::exp(x * P.s2a) * pv.hstar_r(x, c));
    }
    for (size_t i = 1; i + 1 < ys.size(); ++i) {
        const double lam = (ys[i] - ys[i - 1]) / (ys[i + 1] - ys[i - 1]);
        const double chord = (1 - lam) * Hs[i - 1] + lam * Hs[i + 1];
        CHECK(Hs[i] <= chord + 1e-8 * (1.0 + std::abs(chord)));
    }
}

TEST_CASE("continuity in c at zero") {
    auto& pv = vl_pv();
    double worst = 0.0;
    for (double x = 0.0; x <= 2.5; x += 0.05) {
        const double gap = std::abs(pv.value(x, 1e-5) - pv.value(x, 0.0));
        worst = std::max(worst, gap);
    }
    CHECK(worst < 2e-4);
}

TEST_CASE("one-shot waiting region sits inside II and III") {
    // The containment is asymptotic: the one-shot region overhangs III near
    // g0 by O(c), so the fuel grid must stay small relative to the margin.
    auto& pv = vl_pv();
    const auto& sol = pv.solution();
    const Problem& P = pv.problem();
    const double c_hi = std::min(sol.levels.c_I, sol.levels.c0) / 20.0;
    const double margin = 1e-2;
    const double limits[3] = {P.cst.x_half_delta, P.f0(), sol.levels.g0};
    for (int k = 1; k <= 8; ++k) {
        const double c = c_hi * k / 8.0;
        OneShotSolution os = solve_oneshot(c, P);
        auto sl = pv.slice(c);
        for (auto [lo, hi] : os.waiting()) {
            for (int i = 1; i < 40; ++i) {
                const double x = lo + (hi - lo) * i / 40.0;
                bool near_limit = false;
                for (double L : limits)
                    if (std::abs(x - L) <= margin) near_limit = true;
                if (near_limit) continue;
                auto tag = pv.classify(x, sl).tag;
                INFO("c=" << c << " x=" << x << " tag=" << region_name(tag));
                CHECK((tag == Region::II || tag == Region::III));
            }
        }
    }
}

TEST_CASE("high-cost value function") {
    PiecewiseValue pv(solve(make_problem(1.4, 1.0, 1.0)));
    const double d = 1.0;
    CHECK(pv.value(0.3, 0.5) == Catch::Approx(d * 0.09));
    // partial shot to 1/(2 delta)
    CHECK(pv.value(0.8, 0.5) == Catch::Approx((0.8 - 0.5) + d * 0.25));
    // full expenditure
    CHECK(pv.value(2.0, 0.5) == Catch::Approx(0.5 + d * 1.5 * 1.5));
    CHECK(pv.classify(0.3, 0.5).tag == Region::I);
    CHECK(pv.classify(0.8, 0.5).tag == Region::IVa);
    CHECK(pv.classify(2.0, 0.5).tag == Region::IVc);
}
