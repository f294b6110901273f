#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fuelctrl/curve.hpp"
#include "fuelctrl/model.hpp"
#include "fuelctrl/oneshot.hpp"
#include "fuelctrl/special.hpp"

namespace fuelctrl {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class BoundaryType { Absorbing, Repelling, Reflecting };

/// Which right-hand obstacle the common tangent touches.
enum class RightPhase {
    Hr1,       ///< tangency on h_r1 (small fuel)
    HstarMid,  ///< tangency on the convexified h_r* middle branch
    Hr2,       ///< tangency on h_r2
    LargeFuel  ///< past c_bar: F from its ODE, G the root of q(.;F)
};

// ---------------------------------------------------------------------------
// Lambda-region pair (Fbar, Gbar) on (0, c_I].
// ---------------------------------------------------------------------------
struct BarSolution {
    Problem prob;
    Curve fbar;  // c -> Fbar with exact slope
    Curve gbar;  // sampled Gbar for hot loops; chi(Fbar(c)) is the exact value
    double c_I = 0.0;
    double g0 = 0.0;  // Gbar(0+) = X(f0)

    double Fbar(double c) const { return std::min(fbar.value(c), prob.cst.x_half_lambda); }
    double Fbar_prime(double c) const { return fbar.deriv(c); }
    double Gbar(double c) const { return chi(Fbar(c), prob); }
    double Gbar_fast(double c) const { return gbar.empty() ? Gbar(c) : gbar.value(c); }
    double Gbar_prime(double c) const {
        const double z = Fbar(c);
        if (z >= prob.cst.x_half_lambda) return 1.0;
        const double x = chi(z, prob);
        const double qtx = dq_dx(x, z, prob);
        const double dqd = std::exp(z * prob.s2a) *
                           (prob.s2a * (1.0 - 2.0 * prob.delta() * z) - 2.0 * prob.delta());
        const double qtz = dq_dz(x, z, prob) - dqd;
        return -(qtz / qtx) * Fbar_prime(c);
    }
    double Atilde(double c) const { return Ht3(Fbar(c), c, prob); }
    double Btilde(double c) const { return Ht4(Fbar(c), c, prob); }
    // U-coefficients on the lambda waiting region; exact from the reflecting ODEs
    double Ctilde(double c) const { return h3(Gbar(c), prob); }
    double Dtilde(double c) const { return -h4(Gbar(c), prob); }

    double D(double c) const { return prob.cst.x_half_lambda - c_I + c; }

    /// Smallest u with Gbar(c-u) = x-u; empty when the diagonal through (x,c)
    /// misses the reflecting boundary.
    std::optional<double> zeta_to_gbar(double x, double c) const {
        const double u_lo = std::max(0.0, c - c_I);
        if (u_lo >= c) return std::nullopt;
        auto phi = [&](double u) { return Gbar(c - u) - (x - u); };
        const double at_lo = phi(u_lo);
        if (at_lo >= 0.0) return at_lo == 0.0 ? std::optional<double>(u_lo) : std::nullopt;
        if (!(x < g0 + c)) return std::nullopt;
        const double hi = c * (1.0 - 1e-15);
        if (phi(hi) <= 0.0) return std::nullopt;
        return find_root_strict(phi, u_lo, hi, 1e-13);
    }

    struct HstarEval {
        double h = 0, hx = 0, hxx = 0, zeta = 0, theta = 0;
    };
    /// Convexified right obstacle on (D(c), g0+c) for c > c_I.
    HstarEval hstar(double x, double c) const {
        auto z = zeta_to_gbar(x, c);
        if (!z) throw std::runtime_error("hstar: (x,c) outside the h_r* middle branch");
        const double zeta = *z, theta = c - zeta, xi = x - zeta;
        const double s = prob.s2a, a = prob.alpha(), l = prob.lambda();
        const double At = Atilde(theta), Bt = Btilde(theta);
        const double ep = std::exp(xi * s), em = std::exp(-xi * s);
        HstarEval e;
        e.zeta = zeta;
        e.theta = theta;
        const double Q3 = At * ep + Bt * em + l / a * xi * xi + l / (a * a);
        e.h = Q3 + zeta - l / a * x * x - l / (a * a);
        e.hx = s * (At * ep - Bt * em) + 2.0 * l / a * xi - 2.0 * l / a * x;
        e.hxx = 2.0 * a * (At * ep + Bt * em);  // quadratic parts cancel
        return e;
    }
};

/// Fbar' = 1 + (h3(X(Fbar)) - h3(Fbar)) / dHt3_dx(Fbar, c) from Fbar(0) = f0,
/// integrated until Fbar reaches alpha/(2 lambda).
inline BarSolution solve_Fbar_Gbar(const Problem& P) {
    if (P.cst.regime != Regime::VLambdaShape)
        throw UnsupportedRegime("solve_Fbar_Gbar: requires the v-lambda regime");
    BarSolution bar;
    bar.prob = P;
    bar.g0 = chi(P.f0(), P);
    const double top = P.cst.x_half_lambda;
    auto rhs = [&](double c, double F) {
        F = std::min(F, top);
        const double den = dHt3_dx(F, c, P);
        if (!(den > 0.0))
            throw std::runtime_error("solve_Fbar_Gbar: dHt3/dx <= 0 (Fbar left its domain)");
        return 1.0 + (h3(chi(F, P), P) - h3(F, P)) / den;
    };
    auto event = [&](double, double F) { return F - top; };
    const double c_span = 4.0 * (top - P.f0()) + 1.0;
    auto res = detail::integrate_scalar(rhs, 0.0, P.f0(), c_span, event, 1e-10, 1e-13,
                                        std::max((top - P.f0()) / 40.0, 1e-4));
    bar.fbar = std::move(res.curve);
    if (!res.event_hit)
        throw std::runtime_error("solve_Fbar_Gbar: Fbar never reached alpha/(2 lambda)");
    bar.c_I = res.t_event;
    for (size_t i = 0; i < bar.fbar.size(); ++i) {
        const double c = bar.fbar.knots()[i];
        if (c > bar.c_I) break;
        bar.gbar.add(c, bar.Gbar(c), bar.Gbar_prime(c));
    }
    if (bar.gbar.t_max() < bar.c_I)  // one-sided slope at the tip
        bar.gbar.add(bar.c_I, P.cst.x_half_lambda, bar.gbar.derivs().back());
    return bar;
}

// ---------------------------------------------------------------------------
// (F, G) continuation.
// ---------------------------------------------------------------------------

struct FGSample {
    double c = 0, F = 0, G = 0, Fp = 0, Gp = 0;
    RightPhase phase = RightPhase::Hr1;
};

namespace detail {

struct RightTangent {
    double S = 0, T = 0, Sx = 0, Tx = 0;
};

inline RightTangent right_tangent(double x, double c, RightPhase ph, const Problem& P,
                                  const BarSolution* bar) {
    RightTangent r;
    switch (ph) {
        case RightPhase::Hr1:
            r.S = Ht3(x, c, P);
            r.T = Ht4(x, c, P);
            r.Sx = dHt3_dx(x, c, P);
            r.Tx = dHt4_dx(x, c, P);
            return r;
        case RightPhase::Hr2:
            r.S = Hr2s(x, c, P);
            r.T = Hr2t(x, c, P);
            r.Sx = dHr2s_dx(x, c, P);
            r.Tx = dHr2t_dx(x, c, P);
            return r;
        case RightPhase::HstarMid: {
            if (!bar) throw std::logic_error("right_tangent: h_r* needs the lambda region");
            auto e = bar->hstar(x, c);
            const double s = P.s2a;
            const double ep = std::exp(x * s), em = std::exp(-x * s);
            r.S = em * (e.hx + s * e.h) / (2.0 * s);
            r.T = ep * (-e.hx + s * e.h) / (2.0 * s);
            r.Sx = em * (e.hxx - 2.0 * P.alpha() * e.h) / (2.0 * s);
            r.Tx = -ep * ep * r.Sx;
            return r;
        }
        case RightPhase::LargeFuel:
            throw std::logic_error("right_tangent: no tangency past c_bar");
    }
    return r;
}

// G-domain of the active phase (the tangency point must stay inside it).
inline std::pair<double, double> phase_G_domain(double c, RightPhase ph, const Problem& P,
                                                const BarSolution* bar) {
    const double xc = P.xc(c);
    switch (ph) {
        case RightPhase::Hr1: {
            double hi = P.f0() + c;
            if (bar && c >= bar->c_I) hi = std::min(hi, bar->D(c));
            return {xc, hi};
        }
        case RightPhase::HstarMid:
            return {bar->D(c), bar->g0 + c};
        case RightPhase::Hr2:
        default:
            return {xc, kInf};
    }
}

// Newton solve of h1(F) = S(G), h2(F) = T(G) in the active phase.
// On success x1/x2 hold the root; validated by the residual.
inline bool tangency_newton(double c, RightPhase ph, const Problem& P, const BarSolution* bar,
                            double& x1, double& x2) {
    const double xc = P.xc(c);
    const auto [g_lo, g_hi] = phase_G_domain(c, ph, P, bar);
    const double pad = 1e-12 * (1.0 + std::abs(g_lo));
    auto clampG = [&](double v) {
        const double hi = g_hi == kInf ? v : std::min(v, g_hi - pad);
        return std::max(hi, g_lo + pad);
    };
    x2 = clampG(x2);
    x1 = std::clamp(x1, 0.0, xc * (1.0 - 1e-12));
    for (int it = 0; it < 60; ++it) {
        const RightTangent rt = right_tangent(x2, c, ph, P, bar);
        const double r1 = h1(x1, P) - rt.S;
        const double r2 = h2(x1, P) - rt.T;
        const double j11 = dh1(x1, P), j12 = -rt.Sx;
        const double j21 = dh2(x1, P), j22 = -rt.Tx;
        const double det = j11 * j22 - j12 * j21;
        if (det == 0.0 || !std::isfinite(det)) return false;
        const double d1 = (-r1 * j22 + r2 * j12) / det;
        const double d2 = (-j11 * r2 + j21 * r1) / det;
        double step = 1.0;
        for (int h = 0; h < 50; ++h) {
            const double n1 = x1 + step * d1, n2 = x2 + step * d2;
            if (n1 >= 0.0 && n1 < xc && n2 > g_lo && (g_hi == kInf || n2 < g_hi)) break;
            step *= 0.5;
        }
        x1 = std::clamp(x1 + step * d1, 0.0, xc * (1.0 - 1e-13));
        x2 = clampG(x2 + step * d2);
        if (std::abs(step * d1) + std::abs(step * d2) < 1e-14 * (1.0 + std::abs(x2))) break;
    }
    if (!std::isfinite(x1) || !std::isfinite(x2)) return false;
    const RightTangent rt = right_tangent(x2, c, ph, P, bar);
    const double scale = 1.0 + std::abs(rt.S) + std::abs(rt.T);
    return std::abs(h1(x1, P) - rt.S) + std::abs(h2(x1, P) - rt.T) < 1e-9 * scale;
}

}  // namespace detail

struct FGSolution {
    Problem prob;
    std::shared_ptr<const BarSolution> bar;
    std::vector<FGSample> samples;  // tangency part, ordered in c
    Curve f_large;                  // F(c) for c >= c_bar
    Curve g_large;                  // sampled G on the reflecting range
    double c_bar = kInf;
    double c_hat = kInf;     // G reaches f0 + c (switch to h_r2)
    double c_star = kInf;    // G reaches D(c)   (switch to h_r*)
    double c_dagger = kInf;  // G reaches g0 + c (switch back to h_r2)
    double c_g = kInf;       // G reaches alpha/(2 lambda)
    double c_max = 0.0;
    double F_at_cbar = 0, G_at_cbar = 0;

    RightPhase phase_at(double c) const {
        if (c >= c_bar) return RightPhase::LargeFuel;
        if (c >= c_dagger || c >= c_hat) return RightPhase::Hr2;
        if (c >= c_star) return RightPhase::HstarMid;
        return RightPhase::Hr1;
    }

    BoundaryType G_type(double c) const {
        return c >= c_bar ? BoundaryType::Reflecting : BoundaryType::Repelling;
    }

    struct Point {
        double F = 0, G = 0, Fp = 0, Gp = 0;
        RightPhase phase = RightPhase::Hr1;
    };

    Point at(double c) const;
    double F(double c) const { return at(c).F; }
    double G(double c) const { return at(c).G; }
    double A(double c) const { return h1(at(c).F, prob); }
    double B(double c) const { return h2(at(c).F, prob); }

    /// Coefficients (C, D) of U = 2 lambda x / alpha + C e^{xs} + D e^{-xs} on (F, G).
    std::pair<double, double> U_coeffs(double c) const {
        const Point p = at(c);
        if (p.phase == RightPhase::LargeFuel) return {h3(p.G, prob), -h4(p.G, prob)};
        const auto rt = detail::right_tangent(p.G, c, p.phase, prob, bar.get());
        return {h3(p.G, prob) + rt.Sx * (p.Gp - 1.0), -h4(p.G, prob) + rt.Tx * (p.Gp - 1.0)};
    }

    // Hermite interpolation, cheap enough for per-step simulation queries.
    double F_interp(double c) const { return interp(c, true); }
    double G_interp(double c) const {
        if (c >= c_bar) {
            if (!g_large.empty()) return g_large.value(c);
            return q_root_above(f_large.value(c), prob);
        }
        return interp(c, false);
    }

  private:
    double interp(double c, bool wantF) const {
        if (wantF && c >= c_bar) return f_large.value(c);
        const auto& ss = samples;
        if (c <= ss.front().c) {
            const auto& s = ss.front();
            return wantF ? s.F + (c - s.c) * s.Fp : s.G + (c - s.c) * s.Gp;
        }
        if (c >= ss.back().c) {
            const auto& s = ss.back();
            return wantF ? s.F + (c - s.c) * s.Fp : s.G + (c - s.c) * s.Gp;
        }
        size_t lo = 0, hi = ss.size() - 1;
        while (hi - lo > 1) {
            const size_t mid = (lo + hi) / 2;
            (ss[mid].c <= c ? lo : hi) = mid;
        }
        const auto &s0 = ss[lo], &s1 = ss[lo + 1];
        const double h = s1.c - s0.c, t = (c - s0.c) / h;
        const double t2 = t * t, t3 = t2 * t;
        const double v0 = wantF ? s0.F : s0.G, v1 = wantF ? s1.F : s1.G;
        const double d0 = (wantF ? s0.Fp : s0.Gp) * h, d1 = (wantF ? s1.Fp : s1.Gp) * h;
        return (2 * t3 - 3 * t2 + 1) * v0 + (t3 - 2 * t2 + t) * d0 + (-2 * t3 + 3 * t2) * v1 +
               (t3 - t2) * d1;
    }
};

namespace detail {

inline FGSolution::Point make_point(double c, double F, double G, RightPhase ph,
                                    const Problem& P, const BarSolution* bar) {
    FGSolution::Point p;
    p.F = F;
    p.G = G;
    p.phase = ph;
    const auto rt = right_tangent(G, c, ph, P, bar);
    const double dL = (std::exp(2.0 * F * P.s2a) - std::exp(2.0 * G * P.s2a)) * rt.Sx;
    p.Gp = 1.0 - q_fn(G, F, P) / dL;
    p.Fp = (rt.Sx * (p.Gp - 1.0) + h3(G, P) - P.s2a * h1(F, P)) / dh1(F, P);
    return p;
}

}  // namespace detail

inline FGSolution::Point FGSolution::at(double c) const {
    if (!(c > 0.0)) throw std::domain_error("FGSolution::at: c must be positive");
    if (c > c_max * (1.0 + 1e-9) && c > samples.back().c)
        throw std::domain_error("FGSolution::at: beyond solved range");
    if (c >= c_bar) {
        Point p;
        p.phase = RightPhase::LargeFuel;
        auto [Fv, Fp] = f_large.eval(std::min(c, f_large.t_max()));
        p.F = Fv;
        p.Fp = Fp;
        p.G = q_root_above(p.F, prob);
        p.Gp = -(dq_dz(p.G, p.F, prob) / dq_dx(p.G, p.F, prob)) * p.Fp;
        return p;
    }
    const RightPhase ph = phase_at(c);
    double x1 = F_interp(c), x2 = G_interp(c);
    if (!detail::tangency_newton(c, ph, prob, bar.get(), x1, x2))
        throw std::runtime_error("FGSolution::at: refinement failed at c=" + std::to_string(c));
    return detail::make_point(c, x1, x2, ph, prob, bar.get());
}

// ---------------------------------------------------------------------------
// Continuation driver.
// ---------------------------------------------------------------------------

/// Tangency continuation in c with phase switching; fills everything up to
/// c_bar.  Call extend_FG_large afterwards for the reflecting part.
inline FGSolution solve_FG_tangency(const Problem& P, std::shared_ptr<const BarSolution> bar) {
    if (P.cst.regime != Regime::VShape && P.cst.regime != Regime::VLambdaShape)
        throw UnsupportedRegime(
            "solve_FG: full boundary solve defined for lambda in (lambda_star, alpha*delta)");
    FGSolution fg;
    fg.prob = P;
    fg.bar = std::move(bar);
    const BarSolution* bp = fg.bar.get();

    const double c_scale = std::max(P.f0(), P.cst.x_half_lambda);
    RightPhase ph = RightPhase::Hr1;
    double c = 1e-6 * c_scale;
    double x1 = P.xc(c) - 0.25 * c, x2 = P.xc(c) + 0.25 * c;
    if (!detail::tangency_newton(c, ph, P, bp, x1, x2))
        throw std::runtime_error("solve_FG: failed to start continuation");

    auto push = [&](double cc, double F, double G, RightPhase p) {
        auto pt = detail::make_point(cc, F, G, p, P, fg.bar.get());
        fg.samples.push_back({cc, pt.F, pt.G, pt.Fp, pt.Gp, p});
    };
    push(c, x1, x2, ph);

    // bisection helper: locate the smallest c in (c_lo, c_hi] where pred
    // holds, tracking warm starts; pred evaluated on the converged tangency.
    auto locate_event = [&](double c_lo, double c_hi, double wF, double wG, RightPhase p,
                            auto&& pred) {
        double lo = c_lo, hi = c_hi, e1 = wF, e2 = wG;
        for (int i = 0; i < 90 && hi - lo > 1e-13 * (1.0 + hi); ++i) {
            const double mid = 0.5 * (lo + hi);
            double m1 = e1, m2 = e2;
            const bool okm = detail::tangency_newton(mid, p, P, bp, m1, m2);
            if (!okm || pred(mid, m1, m2)) {
                hi = mid;
            } else {
                lo = mid;
                e1 = m1;
                e2 = m2;
            }
        }
        detail::tangency_newton(hi, p, P, bp, e1, e2);
        return std::tuple<double, double, double>(hi, e1, e2);
    };

    double dc = c;
    const double dc_cap = c_scale / 150.0;
    const double c_cap = 40.0 * c_scale;
    bool found_cbar = false;
    while (c < c_cap && !found_cbar) {
        const double cn = c + dc;
        double n1 = x1 + fg.samples.back().Fp * dc;
        double n2 = x2 + fg.samples.back().Gp * dc;
        const bool conv = detail::tangency_newton(cn, ph, P, bp, n1, n2);
        const auto [g_lo, g_hi] = detail::phase_G_domain(cn, ph, P, bp);
        (void)g_lo;
        const double edge_tol = 1e-9 * (1.0 + std::abs(x2));
        const bool at_edge = conv && g_hi < kInf && n2 > g_hi - 2.0 * edge_tol;
        const bool stalled = !conv && dc < 1e-10 * (1.0 + c);
        if (at_edge || (stalled && g_hi < kInf)) {
            // the tangency point reached the edge of the phase domain
            auto [c_sw, e1, e2] =
                locate_event(c, cn, x1, x2, ph, [&](double cc, double, double g) {
                    return g >= detail::phase_G_domain(cc, ph, P, bp).second - edge_tol;
                });
            push(c_sw, e1, e2, ph);
            if (ph == RightPhase::Hr1 && bp && c_sw >= bp->c_I && bp->D(c_sw) < P.f0() + c_sw) {
                fg.c_star = c_sw;
                ph = RightPhase::HstarMid;
            } else if (ph == RightPhase::Hr1) {
                fg.c_hat = c_sw;
                ph = RightPhase::Hr2;
            } else {
                fg.c_dagger = c_sw;
                ph = RightPhase::Hr2;
            }
            c = c_sw;
            x1 = e1;
            x2 = e2;
            dc = std::max(c_scale * 1e-8, dc * 0.25);
            continue;
        }
        if (!conv) {
            dc *= 0.5;
            if (dc < 1e-14 * (1.0 + c))
                throw std::runtime_error("solve_FG: continuation stalled at c=" +
                                         std::to_string(c));
            continue;
        }
        // q-event first (c_bar ends the tangency part)
        if (q_fn(n2, n1, P) <= 0.0) {
            auto [cb, e1, e2] = locate_event(
                c, cn, x1, x2, ph, [&](double, double f, double g) { return q_fn(g, f, P) <= 0.0; });
            fg.c_bar = cb;
            fg.F_at_cbar = e1;
            fg.G_at_cbar = e2;
            push(cb, e1, e2, ph);
            found_cbar = true;
            break;
        }
        if (fg.c_g == kInf && n2 >= P.cst.x_half_lambda) {
            auto [cg, e1, e2] = locate_event(c, cn, x1, x2, ph, [&](double, double, double g) {
                return g >= P.cst.x_half_lambda;
            });
            (void)e1;
            (void)e2;
            fg.c_g = cg;
        }
        c = cn;
        x1 = n1;
        x2 = n2;
        push(c, x1, x2, ph);
        dc = std::min(dc * 1.3, dc_cap);
    }
    if (!found_cbar) throw std::runtime_error("solve_FG: c_bar not found below the cap");
    fg.c_max = fg.c_bar;
    return fg;
}

/// Integrates F' = (h3(G) - sqrt(2a) h1(F)) / h1'(F) with G the q-root above
/// alpha/(2 lambda), from c_bar up to c_max.
inline void extend_FG_large(FGSolution& fg, double c_max) {
    const Problem& P = fg.prob;
    auto rhs = [&](double, double F) {
        const double G = q_root_above(F, P);
        return (h3(G, P) - P.s2a * h1(F, P)) / dh1(F, P);
    };
    if (c_max > fg.c_bar) {
        auto res = detail::integrate_scalar(rhs, fg.c_bar, fg.F_at_cbar, c_max, nullptr, 1e-10,
                                            1e-13, std::max((c_max - fg.c_bar) / 60.0, 1e-4));
        fg.f_large = std::move(res.curve);
        fg.c_max = c_max;
    } else {
        fg.f_large = Curve();
        fg.f_large.add(fg.c_bar, fg.F_at_cbar, rhs(fg.c_bar, fg.F_at_cbar));
        fg.c_max = fg.c_bar;
    }
    fg.g_large = Curve();
    for (size_t i = 0; i < fg.f_large.size(); ++i) {
        const double c = fg.f_large.knots()[i];
        const double F = fg.f_large.values()[i], Fp = fg.f_large.derivs()[i];
        const double G = q_root_above(F, P);
        const double Gp = -(dq_dz(G, F, P) / dq_dx(G, F, P)) * Fp;
        fg.g_large.add(c, G, Gp);
    }
}

inline FGSolution solve_FG(const Problem& P, std::shared_ptr<const BarSolution> bar,
                           double c_max) {
    FGSolution fg = solve_FG_tangency(P, std::move(bar));
    extend_FG_large(fg, c_max);
    return fg;
}

// ---------------------------------------------------------------------------
// Fuel levels and the assembled solution.
// ---------------------------------------------------------------------------

struct FuelLevels {
    double c_bar = kInf;
    double c_hat = kInf;
    double c0 = kInf;  // min(c_bar, c_hat)
    double c_g = kInf;
    double c_I = 0.0;
    double c_star = kInf;
    double c_dagger = kInf;
    double c_tilde = kInf;  // Fbar / G intersection (expected +inf)
    double g0 = kInf;
    double g_delta = kInf;
    int trichotomy_case = 0;  // 1: c_bar <= c*, 2: c* < c_bar < c_dagger, 3: c_dagger <= c_bar
    std::vector<std::string> violations;
};

inline FuelLevels fuel_levels(const Problem& P, const FGSolution& fg, const BarSolution* bar) {
    FuelLevels fl;
    fl.c_bar = fg.c_bar;
    fl.c_hat = fg.c_hat;
    fl.c0 = std::min(fg.c_bar, fg.c_hat);
    fl.c_g = fg.c_g;
    fl.g_delta = q_root_above(P.cst.x_half_delta, P);
    auto check = [&](bool ok, const std::string& what) {
        if (!ok) fl.violations.push_back(what);
    };
    if (bar) {
        fl.c_I = bar->c_I;
        fl.g0 = bar->g0;
        fl.c_star = fg.c_star;
        fl.c_dagger = fg.c_dagger;
        if (fl.c_star == kInf) {
            // trichotomy case 1: G meets D(c) only on the reflecting branch
            auto gd = [&](double cc) { return fg.at(cc).G - bar->D(cc); };
            if (gd(fg.c_max) >= 0.0 && gd(fg.c_bar) < 0.0)
                fl.c_star = find_root_strict(gd, fg.c_bar, fg.c_max, 1e-11);
            else if (gd(fg.c_bar) >= 0.0)
                fl.c_star = find_root_strict(gd, bar->c_I * (1.0 + 1e-9), fg.c_bar, 1e-11);
        }
        if (fl.c_dagger == kInf && fl.c_star < kInf && fl.c_star < fg.c_max) {
            auto gg = [&](double cc) { return fg.at(cc).G - (bar->g0 + cc); };
            if (gg(fg.c_max) >= 0.0)
                fl.c_dagger = find_root_strict(gg, fl.c_star, fg.c_max, 1e-11);
        }
        if (fl.c_bar <= fl.c_star)
            fl.trichotomy_case = 1;
        else if (fl.c_bar < fl.c_dagger)
            fl.trichotomy_case = 2;
        else
            fl.trichotomy_case = 3;
        // intersection search for Fbar vs G on (0, c_I]
        {
            const int n = 400;
            double c_cross = kInf, prev_gap = kInf, prev_c = 0.0;
            for (int i = 1; i <= n; ++i) {
                const double cc = bar->c_I * i / n;
                const double gap = bar->Fbar(cc) - fg.at(cc).G;
                if (prev_gap > 0.0 && gap <= 0.0 && c_cross == kInf)
                    c_cross = find_root_strict(
                        [&](double u) { return bar->Fbar(u) - fg.at(u).G; }, prev_c, cc, 1e-11);
                prev_gap = gap;
                prev_c = cc;
            }
            fl.c_tilde = c_cross;
            check(c_cross == kInf, "G crosses Fbar before c_I (c_tilde finite)");
        }
        check(fl.c_I <= fl.c_g + 1e-10, "c_I <= c_g violated");
        check(fl.c_g < std::min(fl.c_bar, P.cst.k_bar) + 1e-10,
              "c_g < min(c_bar, k_bar) violated");
        check(fl.c_I < fl.c0, "c_I < c0 violated");
        check(fl.c_I < fl.c_star, "c_I < c_star violated");
        check(fl.g0 < fl.g_delta, "g0 < g_delta violated");
    }
    return fl;
}

struct Solution {
    Problem prob;
    NoFuelSolution v0;
    std::shared_ptr<const BarSolution> bar;
    std::shared_ptr<const FGSolution> fg;
    FuelLevels levels;
};

/// Full solve.  The boundary curves are constructed for c in
/// (0, c_max_mult * c_bar].
inline Solution solve(const Problem& P, double c_max_mult = 3.0) {
    Solution sol;
    sol.prob = P;
    sol.v0 = solve_V0(P);
    switch (P.cst.regime) {
        case Regime::HighCost:
            return sol;  // vertical boundary at 1/(2 delta): nothing to construct
        case Regime::LegacyBelowStar:
            throw UnsupportedRegime(
                "solve: lambda <= lambda_star(alpha, delta); only classification and the "
                "no-fuel solution are available in this regime");
        case Regime::VShape:
        case Regime::VLambdaShape:
            break;
    }
    std::shared_ptr<const BarSolution> bar;
    if (P.cst.regime == Regime::VLambdaShape)
        bar = std::make_shared<BarSolution>(solve_Fbar_Gbar(P));
    FGSolution fg = solve_FG_tangency(P, bar);
    extend_FG_large(fg, std::max(c_max_mult, 1.0) * fg.c_bar);
    sol.bar = bar;
    sol.fg = std::make_shared<FGSolution>(std::move(fg));
    sol.levels = fuel_levels(P, *sol.fg, bar.get());
    return sol;
}

inline Solution solve(const ProblemParams& par, double c_max_mult = 3.0) {
    return solve(make_problem(par), c_max_mult);
}

}  // namespace fuelctrl
