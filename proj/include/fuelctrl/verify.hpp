#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "fuelctrl/valuefn.hpp"

namespace fuelctrl {

struct CheckResult {
    std::string name;
    double worst = 0.0;   // worst signed slack (negative = violation) or gap
    double tol = 0.0;
    double at_x = 0.0, at_c = 0.0;
    bool pass = true;
};

struct VerificationReport {
    std::vector<CheckResult> checks;
    int nx = 0, nc = 0;
    double x_max = 0.0, c_max = 0.0;
    long points_checked = 0;
    double growth_K0 = 0.0, growth_K1 = 0.0;  // fitted |Q_x| <= (K0 + K1 c)(1 + |x|)

    bool all_pass() const {
        for (const auto& c : checks)
            if (!c.pass) return false;
        return true;
    }
    const CheckResult* find(const std::string& name) const {
        for (const auto& c : checks)
            if (c.name == name) return &c;
        return nullptr;
    }
};

namespace detail {

struct WorstTracker {
    double worst = kInf;
    double x = 0, c = 0;
    void update(double slack, double xx, double cc) {
        if (slack < worst) {
            worst = slack;
            x = xx;
            c = cc;
        }
    }
};

// segments of possible C^2 failure at fuel level c, in x
inline std::vector<double> nondiff_segments(const PiecewiseValue& pv, double c) {
    std::vector<double> seg;
    const Solution& s = pv.solution();
    if (!s.fg) {
        seg.push_back(s.prob.cst.x_half_delta);
        seg.push_back(s.prob.cst.x_half_delta + c);
        return seg;
    }
    auto sl = pv.slice(c);
    seg.push_back(sl.F);
    seg.push_back(sl.G);
    seg.push_back(s.prob.f0() + c);
    if (sl.has_bar) {
        seg.push_back(sl.Fbar);
        seg.push_back(sl.Gbar);
    }
    if (s.bar) {
        seg.push_back(s.bar->g0 + c);
        if (c >= s.bar->c_I) seg.push_back(s.bar->D(c));
    }
    if (c >= s.fg->c_bar) seg.push_back(s.fg->G_at_cbar + (c - s.fg->c_bar));
    return seg;
}

}  // namespace detail

/// Variational-inequality battery: obstacle bound, gradient constraint,
/// supersolution property (finite-difference generator), complementarity and
/// the linear growth fit, on an (x, c) grid with a margin around the
/// non-differentiability segments.
inline VerificationReport check_variational(const PiecewiseValue& pv, int nx = 400, int nc = 200,
                                            double x_max = 0.0, double c_max = 0.0,
                                            double tol = 1e-6, int margin_cells = 2) {
    const Problem& P = pv.problem();
    const Solution& S = pv.solution();
    if (c_max <= 0.0) c_max = S.fg ? 0.95 * S.fg->c_max : 2.0;
    if (x_max <= 0.0)
        x_max = std::max(P.cst.x_half_delta, std::max(S.fg ? P.f0() : P.cst.x_half_delta,
                                                      P.cst.x_half_lambda)) +
                c_max + 4.0 / P.s2a;
    VerificationReport rep;
    rep.nx = nx;
    rep.nc = nc;
    rep.x_max = x_max;
    rep.c_max = c_max;
    const double dxg = x_max / nx;

    detail::WorstTracker obstacle, gradient, supersol, compl_tr, fd_agree;
    double growth_max_lo = 0.0, growth_max_hi = 0.0;
    double c_lo_seen = kInf, c_hi_seen = 0.0;

    for (int j = 1; j <= nc; ++j) {
        const double c = c_max * j / nc;
        auto sl = pv.slice(c);
        auto segs = detail::nondiff_segments(pv, c);
        double row_growth = 0.0;
        for (int i = 0; i <= nx; ++i) {
            const double x = x_max * i / nx;
            bool skip = false;
            for (double sgm : segs)
                if (std::abs(x - sgm) < margin_cells * dxg) {
                    skip = true;
                    break;
                }
            if (skip) continue;
            ++rep.points_checked;
            const double Q = pv.value(x, sl);
            const double Qx = pv.dx(x, sl.c);
            const double Qc = pv.dc(x, sl.c);
            const double scale = 1.0 + std::abs(Q);
            // (a) obstacle bound
            const double slack_a = P.delta() * x * x - Q;
            obstacle.update(slack_a / scale, x, c);
            // (b) gradient constraint
            const double slack_b = 1.0 - std::abs(Qx) - Qc;
            gradient.update(slack_b / scale, x, c);
            // (c) supersolution via 5-point finite differences
            const double h = std::min(0.5 * margin_cells * dxg, 1e-3 * (1.0 + x));
            auto V = [&](double u) { return pv.value(u, sl); };
            const double qxx_fd = (-V(x + 2 * h) + 16 * V(x + h) - 30 * Q + 16 * V(x - h) -
                                   V(x - 2 * h)) /
                                  (12 * h * h);
            const double slack_c = 0.5 * qxx_fd - P.alpha() * Q + P.lambda() * x * x;
            supersol.update(slack_c / scale, x, c);
            fd_agree.update(-std::abs(slack_c - pv.generator_residual(x, sl)) / scale, x, c);
            // (d) complementarity
            const double prod = slack_a * slack_b * slack_c;
            compl_tr.update(-std::abs(prod) / (scale * scale), x, c);
            row_growth = std::max(row_growth, std::abs(Qx) / (1.0 + x));
        }
        if (c < c_lo_seen) {
            c_lo_seen = c;
            growth_max_lo = row_growth;
        }
        if (c > c_hi_seen) {
            c_hi_seen = c;
            growth_max_hi = row_growth;
        }
    }
    auto add = [&](const std::string& name, const detail::WorstTracker& w, double tl) {
        CheckResult r;
        r.name = name;
        r.worst = w.worst;
        r.tol = tl;
        r.at_x = w.x;
        r.at_c = w.c;
        r.pass = w.worst >= -tl;
        rep.checks.push_back(r);
    };
    add("obstacle_bound", obstacle, tol);
    add("gradient_constraint", gradient, tol);
    add("supersolution", supersol, tol);
    add("complementarity", compl_tr, tol);
    add("fd_vs_analytic_generator", fd_agree, 100.0 * tol);
    // affine growth envelope K(c) = K0 + K1 c through the extreme rows
    rep.growth_K1 = (growth_max_hi - growth_max_lo) / std::max(c_hi_seen - c_lo_seen, 1e-30);
    rep.growth_K0 = growth_max_lo - rep.growth_K1 * c_lo_seen;
    CheckResult g;
    g.name = "growth_linear";
    g.worst = growth_max_hi;
    g.tol = kInf;
    g.pass = std::isfinite(growth_max_hi);
    rep.checks.push_back(g);
    return rep;
}

/// SF1 (value and x-derivative continuity across F, Fbar, repelling G) and
/// SF2 (U continuity and dU/dx = 0 across Gbar and reflecting G).
inline VerificationReport check_smooth_fit(const PiecewiseValue& pv, int nrows = 60,
                                           double tol = 1e-6) {
    const Solution& S = pv.solution();
    VerificationReport rep;
    if (!S.fg) return rep;  // high-cost: no free boundary to check
    detail::WorstTracker sf1_val, sf1_dx, sf2_u, sf2_dux, rep_dux;
    const double c_top = 0.95 * S.fg->c_max;
    for (int j = 1; j <= nrows; ++j) {
        const double c = c_top * j / nrows;
        auto sl = pv.slice(c);
        auto probe_sf1 = [&](double b) {
            const double step = 1e-6 * (1.0 + std::abs(b));
            const double dv = pv.value(b + step, sl) - pv.value(b - step, sl);
            const double ddx = pv.dx(b + step, sl.c) - pv.dx(b - step, sl.c);
            const double sc = 1.0 + std::abs(pv.value(b, sl));
            // remove the smooth first-order part of the value gap
            const double v_gap = std::abs(dv - 2.0 * step * pv.dx(b, sl.c)) / sc;
            const double dx_gap = std::abs(ddx) / sc - 2.0 * step * std::abs(pv.dxx(b, sl.c));
            sf1_val.update(-v_gap, b, c);
            sf1_dx.update(-std::max(dx_gap, 0.0), b, c);
        };
        probe_sf1(sl.F);
        if (c < S.fg->c_bar) probe_sf1(sl.G);
        if (sl.has_bar) probe_sf1(sl.Fbar);
        auto probe_sf2 = [&](double b) {
            const double step = 1e-6 * (1.0 + std::abs(b));
            const double du = pv.U(b + step, sl.c) - pv.U(b - step, sl.c);
            sf2_u.update(-std::abs(du) - std::abs(pv.U(b - step, sl.c) - 1.0), b, c);
            sf2_dux.update(-std::abs(pv.dU_dx(b - step, sl)), b, c);
        };
        if (c > S.fg->c_bar) probe_sf2(sl.G);
        if (sl.has_bar) probe_sf2(sl.Gbar);
        if (c < S.fg->c_bar) {
            // repelling part: dU/dx(G-) must be strictly positive
            const double d = pv.dU_dx(sl.G - 1e-9, sl);
            rep_dux.update(d, sl.G, c);
        }
    }
    auto add = [&](const std::string& name, const detail::WorstTracker& w, double tl,
                   bool is_min_positive = false) {
        CheckResult r;
        r.name = name;
        r.worst = w.worst;
        r.tol = tl;
        r.at_x = w.x;
        r.at_c = w.c;
        r.pass = is_min_positive ? w.worst > 0.0 : w.worst >= -tl;
        rep.checks.push_back(r);
    };
    add("sf1_value", sf1_val, tol);
    add("sf1_dx", sf1_dx, 10.0 * tol);
    add("sf2_U", sf2_u, tol);
    add("sf2_dUdx", sf2_dux, tol);
    add("repelling_dUdx_positive", rep_dux, 0.0, true);
    return rep;
}

/// Structural hypotheses on the boundary system: monotonicity, slope bounds,
/// q-positivity, limits at c -> 0 and the lambda-region pattern.
inline VerificationReport check_structure(const PiecewiseValue& pv, int nrows = 120) {
    const Solution& S = pv.solution();
    const Problem& P = pv.problem();
    VerificationReport rep;
    auto push = [&](const std::string& name, double worst, double tol, bool pass) {
        CheckResult r;
        r.name = name;
        r.worst = worst;
        r.tol = tol;
        r.pass = pass;
        rep.checks.push_back(r);
    };
    if (!S.fg) {
        push("high_cost_vertical_boundary", 0.0, 0.0, true);
        return rep;
    }
    const FGSolution& fg = *S.fg;
    double worst_Fp = -kInf, worst_Gp_low = kInf, worst_q = kInf;
    for (int j = 1; j <= nrows; ++j) {
        const double c = fg.c_bar * (j - 0.5) / nrows;
        auto p = fg.at(c);
        worst_Fp = std::max(worst_Fp, p.Fp);
        worst_Gp_low = std::min(worst_Gp_low, p.Gp);
        worst_q = std::min(worst_q, q_fn(p.G, p.F, P));
    }
    push("F_decreasing_below_cbar", worst_Fp, 0.0, worst_Fp < 0.0);
    push("G_slope_gt_1_below_cbar", worst_Gp_low, 0.0, worst_Gp_low > 1.0);
    push("q_positive_below_cbar", worst_q, 0.0, worst_q > 0.0);
    double worst_Gp_hi = -kInf, worst_Gp_hi2 = kInf, worst_Gpos = kInf, worst_bounds = kInf;
    for (int j = 1; j <= nrows; ++j) {
        const double c = fg.c_bar + (fg.c_max - fg.c_bar) * j / (nrows + 1);
        if (c <= fg.c_bar) break;
        auto p = fg.at(c);
        worst_Gp_hi = std::max(worst_Gp_hi, p.Gp);
        worst_Gp_hi2 = std::min(worst_Gp_hi2, p.Gp);
        worst_Gpos = std::min(worst_Gpos, p.G - P.cst.x_half_lambda);
        const double b1 = P.cst.x_half_delta - p.F;
        const double b2 = P.cst.x_half_lambda + 1.0 / P.s2a - p.G;
        worst_bounds = std::min({worst_bounds, b1, b2});
    }
    push("G_slope_in_01_above_cbar", worst_Gp_hi, 0.0, worst_Gp_hi < 1.0 && worst_Gp_hi2 > 0.0);
    push("G_above_xhalflambda_above_cbar", worst_Gpos, 0.0, worst_Gpos >= 0.0);
    push("longrun_bounds_above_cbar", worst_bounds, 0.0, worst_bounds > 0.0);
    // limits at c -> 0 by Richardson extrapolation from three smallest rows
    {
        const double c1 = 1e-4, c2 = 5e-5, c3 = 2.5e-5;
        auto lim = [&](auto&& f) {
            const double v1 = f(c1), v2 = f(c2), v3 = f(c3);
            (void)v1;
            return v3 + (v3 - v2);  // first-order Richardson on the dyadic pair
        };
        const double Flim = lim([&](double c) { return fg.at(c).F; });
        const double Glim = lim([&](double c) { return fg.at(c).G; });
        push("F_limit_half_delta", Flim - P.cst.x_half_delta, 1e-3,
             std::abs(Flim - P.cst.x_half_delta) < 1e-3);
        push("G_limit_half_delta", Glim - P.cst.x_half_delta, 1e-3,
             std::abs(Glim - P.cst.x_half_delta) < 1e-3);
    }
    if (S.bar) {
        const BarSolution& bar = *S.bar;
        double worst_Fbp_lo = kInf, worst_Fbp_hi = -kInf, worst_Gbp = -kInf, worst_sep = kInf;
        for (int j = 1; j <= nrows; ++j) {
            const double c = bar.c_I * (j - 0.5) / nrows;
            worst_Fbp_lo = std::min(worst_Fbp_lo, bar.Fbar_prime(c));
            worst_Fbp_hi = std::max(worst_Fbp_hi, bar.Fbar_prime(c));
            worst_Gbp = std::max(worst_Gbp, bar.Gbar_prime(c));
            worst_sep = std::min(worst_sep, bar.Fbar(c) - fg.at(c).G);
        }
        push("Fbar_slope_in_01", worst_Fbp_lo, 0.0, worst_Fbp_lo > 0.0 && worst_Fbp_hi < 1.0);
        push("Gbar_decreasing", worst_Gbp, 0.0, worst_Gbp < 0.0);
        push("G_below_Fbar_on_lambda_range", worst_sep, 0.0, worst_sep > 0.0);
        push("Fbar_limit_f0", bar.Fbar(1e-9) - P.f0(), 1e-6,
             std::abs(bar.Fbar(1e-9) - P.f0()) < 1e-6);
        const double gb0 = bar.Gbar(1e-9);
        push("Gbar_limit_in_range", gb0, 0.0,
             gb0 > P.cst.x_half_lambda && gb0 < P.cst.x_half_lambda + 1.0 / P.s2a);
        push("Fbar_Gbar_close_at_cI",
             std::abs(bar.Fbar(bar.c_I) - P.cst.x_half_lambda) +
                 std::abs(bar.Gbar(bar.c_I) - P.cst.x_half_lambda),
             1e-6, std::abs(bar.Fbar(bar.c_I) - P.cst.x_half_lambda) < 1e-6);
    }
    for (const auto& v : S.levels.violations) push("fuel_level_ordering: " + v, -1.0, 0.0, false);
    return rep;
}

}  // namespace fuelctrl
