#include <catch_amalgamated.hpp>

#include "fuelctrl/io.hpp"
#include "fuelctrl/verify.hpp"

using namespace fuelctrl;

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

TEST_CASE("variational battery passes in both regimes") {
    for (PiecewiseValue* pv : {&vs_pv(), &vl_pv()}) {
        auto rep = check_variational(*pv, 200, 100);
        CAPTURE(report_json(rep, "variational").dump());
        CHECK(rep.all_pass());
        CHECK(rep.points_checked > 10000);
        CHECK(rep.find("supersolution") != nullptr);
        CHECK(std::isfinite(rep.growth_K0));
    }
}

TEST_CASE("smooth fit battery") {
    for (PiecewiseValue* pv : {&vs_pv(), &vl_pv()}) {
        auto rep = check_smooth_fit(*pv);
        CAPTURE(report_json(rep, "smooth_fit").dump());
        CHECK(rep.all_pass());
    }
}

TEST_CASE("structure battery") {
    for (PiecewiseValue* pv : {&vs_pv(), &vl_pv()}) {
        auto rep = check_structure(*pv);
        CAPTURE(report_json(rep, "structure").dump());
        CHECK(rep.all_pass());
    }
}

TEST_CASE("high-cost regime degenerates cleanly") {
    PiecewiseValue pv(solve(make_problem(1.5, 1.0, 1.0)));
    auto st = check_structure(pv);
    CHECK(st.all_pass());
    auto var = check_variational(pv, 120, 60, 4.0, 1.5);
    CAPTURE(report_json(var, "variational").dump());
    CHECK(var.all_pass());
}

TEST_CASE("report serialization is stable") {
    auto rep1 = check_smooth_fit(vs_pv());
    auto rep2 = check_smooth_fit(vs_pv());
    CHECK(report_json(rep1, "sf").dump(2) == report_json(rep2, "sf").dump(2));
}
