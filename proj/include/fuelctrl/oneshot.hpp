#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "fuelctrl/minorant.hpp"
#include "fuelctrl/model.hpp"
#include "fuelctrl/special.hpp"
#include "fuelctrl/transform.hpp"

namespace fuelctrl {

/// Closed-form value of the stopping problem without fuel.
/// For lambda >= alpha*delta stopping immediately is optimal everywhere.
struct NoFuelSolution {
    double lambda = 0, alpha = 0, delta = 0, s2a = 0;
    double edge = 0;  ///< stopping edge: f0, or +inf in the high-cost regime
    double B0 = 0;
    bool stop_everywhere = false;

    double value(double x) const {
        x = std::abs(x);
        if (stop_everywhere || x <= edge) return delta * x * x;
        return B0 * std::exp(-x * s2a) + lambda / alpha * x * x + lambda / (alpha * alpha);
    }
    double deriv(double x) const {  // for x >= 0
        x = std::abs(x);
        if (stop_everywhere || x <= edge) return 2.0 * delta * x;
        return -s2a * B0 * std::exp(-x * s2a) + 2.0 * lambda / alpha * x;
    }
    double second(double x) const {
        x = std::abs(x);
        if (stop_everywhere || x <= edge) return 2.0 * delta;
        return 2.0 * alpha * B0 * std::exp(-x * s2a) + 2.0 * lambda / alpha;
    }
};

inline NoFuelSolution solve_V0(const Problem& P) {
    NoFuelSolution s;
    s.lambda = P.lambda();
    s.alpha = P.alpha();
    s.delta = P.delta();
    s.s2a = P.s2a;
    if (P.lambda() >= P.alpha() * P.delta()) {
        s.stop_everywhere = true;
        s.edge = std::numeric_limits<double>::infinity();
        return s;
    }
    s.edge = P.f0();
    s.B0 = P.B0();
    return s;
}

struct TangencyPair {
    double x1 = 0, x2 = 0;       // natural-scale tangency points
    double y1 = 0, y2 = 0;       // transformed-scale
    double slope = 0, icept = 0; // common line in the transformed scale
    int iters = 0;
};

namespace detail {

// sup over z in [1, y_c] of (line - H_l), the signed distance used to locate
// double tangents by bisection.
inline double line_dist_to_Hl(double slope, double icept, double c, const Problem& P) {
    double zstar;
    const double lo_slope = h1(0.0, P);
    if (slope <= lo_slope)
        zstar = 0.0;
    else if (slope >= h1(std::min(P.xc(c), P.f0()), P))
        zstar = std::min(P.xc(c), P.f0());
    else
        zstar = h1_inv(slope, P);
    const double Y = ScaleMap(P.alpha()).psi(zstar);
    return slope * Y + icept - Hl(zstar, P);
}

inline TangencyPair pack_pair(double x1, double x2, double c, const Problem& P, int iters) {
    TangencyPair t;
    t.x1 = x1;
    t.x2 = x2;
    ScaleMap sm(P.alpha());
    t.y1 = sm.psi(x1);
    t.y2 = sm.psi(x2);
    t.slope = Ht3(x2, c, P);
    t.icept = Ht4(x2, c, P);
    t.iters = iters;
    return t;
}

}  // namespace detail

/// Double tangent between H_l (at x1 < x_c) and H_r1 (at x2 in (x_c, f0+c]).
/// Damped Newton with analytic Jacobian; nested bisection on the signed
/// distance as fallback.  Throws std::range_error when the tangency point
/// leaves the H_r1 branch (fuel level beyond its validity).
inline TangencyPair solve_tangency_12(double c, const Problem& P,
                                      std::optional<std::pair<double, double>> warm = {}) {
    if (!(c > 0.0)) throw std::domain_error("solve_tangency_12: c must be positive");
    const double xc = P.xc(c);
    const double hi2 = P.f0() + c;
    double x1 = warm ? warm->first : xc - 0.25 * std::min(c, 0.1);
    double x2 = warm ? warm->second : xc + 0.25 * std::min(c, 0.1);
    x1 = std::clamp(x1, 0.0, xc * (1.0 - 1e-12));
    x2 = std::clamp(x2, xc * (1.0 + 1e-12), hi2);

    bool ok = false;
    int it = 0;
    for (; it < 80; ++it) {
        const double r1 = h1(x1, P) - Ht3(x2, c, P);
        const double r2 = h2(x1, P) - Ht4(x2, c, P);
        const double j11 = dh1(x1, P), j12 = -dHt3_dx(x2, c, P);
        const double j21 = dh2(x1, P), j22 = -dHt4_dx(x2, c, P);
        const double det = j11 * j22 - j12 * j21;
        if (det == 0.0 || !std::isfinite(det)) break;
        double d1 = (-r1 * j22 + r2 * j12) / det;
        double d2 = (-j11 * r2 + j21 * r1) / det;
        // keep iterates on the correct sides of x_c
        double step = 1.0;
        for (int h = 0; h < 30; ++h) {
            const double n1 = x1 + step * d1, n2 = x2 + step * d2;
            if (n1 >= 0.0 && n1 < xc && n2 > xc && n2 <= hi2 + 0.5 * c + 0.1) break;
            step *= 0.5;
        }
        x1 += step * d1;
        x2 += step * d2;
        if (std::abs(step * d1) + std::abs(step * d2) < 1e-14 * (1.0 + std::abs(x2))) {
            ok = true;
            break;
        }
    }
    if (ok && x2 > hi2 * (1.0 + 1e-12))
        throw std::range_error("solve_tangency_12: tangency point beyond f0+c");
    if (ok && x1 >= 0.0 && x1 < xc && x2 > xc) return detail::pack_pair(x1, x2, c, P, it);

    // fallback: scan + bisection on the signed distance, first sign change past x_c
    auto dist = [&](double xr) {
        return detail::line_dist_to_Hl(Ht3(xr, c, P), Ht4(xr, c, P), c, P);
    };
    const int nscan = 400;
    double lo = xc * (1.0 + 1e-10), flo = dist(lo);
    if (flo <= 0.0) throw std::runtime_error("solve_tangency_12: distance not positive at y_c");
    double root = -1.0;
    for (int i = 1; i <= nscan; ++i) {
        const double xr = xc + (hi2 - xc) * i / nscan;
        const double f = dist(xr);
        if (f <= 0.0) {
            root = find_root_strict(dist, lo, xr, 1e-14);
            break;
        }
        lo = xr;
        flo = f;
    }
    (void)flo;
    if (root < 0.0) throw std::range_error("solve_tangency_12: tangency point beyond f0+c");
    x2 = root;
    x1 = h1_inv(std::clamp(Ht3(x2, c, P), h1(0.0, P), 0.0), P);
    return detail::pack_pair(x1, x2, c, P, -1);
}

struct NoSecondTangent {
    std::string reason;
};

/// Double tangent between H_r1 (at x3 < f0+c) and H_r2 (at x4 > a/(2l)+c/2).
/// Present only in the v-lambda regime for small c; a typed miss is returned
/// when the geometry is absent.
inline std::variant<TangencyPair, NoSecondTangent> solve_tangency_34(
    double c, const Problem& P, std::optional<std::pair<double, double>> warm = {}) {
    if (P.cst.regime != Regime::VLambdaShape)
        return NoSecondTangent{"second tangent exists only in the v-lambda regime"};
    if (!(c > 0.0) || c >= P.cst.k)
        return NoSecondTangent{"no concave belly: c >= k"};
    const double xm = P.cst.x_half_lambda + 0.5 * c;
    const double hi3 = P.f0() + c;
    double x3 = warm ? warm->first : hi3 - 0.05 * std::min(c, 0.2);
    double x4 = warm ? warm->second : xm + 0.5 * (std::min(P.cst.x_half_lambda + 1.0 / P.s2a, P.alpha() / P.lambda() - P.f0()) - P.cst.x_half_lambda);
    bool ok = false;
    int it = 0;
    for (; it < 80; ++it) {
        const double r1 = Ht3(x3, c, P) - Hr2s(x4, c, P);
        const double r2 = Ht4(x3, c, P) - Hr2t(x4, c, P);
        const double j11 = dHt3_dx(x3, c, P), j12 = -dHr2s_dx(x4, c, P);
        const double j21 = dHt4_dx(x3, c, P), j22 = -dHr2t_dx(x4, c, P);
        const double det = j11 * j22 - j12 * j21;
        if (det == 0.0 || !std::isfinite(det)) break;
        double d3 = (-r1 * j22 + r2 * j12) / det;
        double d4 = (-j11 * r2 + j21 * r1) / det;
        double step = 1.0;
        for (int h = 0; h < 30; ++h) {
            const double n3 = x3 + step * d3, n4 = x4 + step * d4;
            if (n3 > P.xc(c) && n3 < hi3 && n4 > xm) break;
            step *= 0.5;
        }
        x3 += step * d3;
        x4 += step * d4;
        if (std::abs(step * d3) + std::abs(step * d4) < 1e-14 * (1.0 + std::abs(x4))) {
            ok = true;
            break;
        }
    }
    if (!ok) {
        // bisection fallback: distance from the H_r2 tangent at x4 to H_r1
        auto dist = [&](double xr) {
            const double s = Hr2s(xr, c, P), I = Hr2t(xr, c, P);
            // sup over x in (x_c, f0+c) of line - H_r1: interior where Ht3 = s
            double zs;
            const double slo = Ht3(P.xc(c) * (1 + 1e-12), c, P), shi = Ht3(hi3, c, P);
            if (s <= slo)
                zs = P.xc(c) * (1 + 1e-12);
            else if (s >= shi)
                zs = hi3;
            else
                zs = find_root_strict([&](double z) { return Ht3(z, c, P) - s; },
                                      P.xc(c) * (1 + 1e-12), hi3, 1e-14);
            const double Y = ScaleMap(P.alpha()).psi(zs);
            return s * Y + I - std::exp(zs * P.s2a) * h_r1(zs, c, P);
        };
        const double xbig = std::max(P.f0(), P.cst.x_half_lambda) + c + 10.0 / P.s2a;
        double lo = xm * (1.0 + 1e-10);
        if (dist(lo) <= 0.0) return NoSecondTangent{"no positive separation at y_m"};
        double root = -1.0;
        const int nscan = 400;
        for (int i = 1; i <= nscan; ++i) {
            const double xr = xm + (xbig - xm) * i / nscan;
            if (dist(xr) <= 0.0) {
                root = find_root_strict(dist, lo, xr, 1e-14);
                break;
            }
            lo = xr;
        }
        if (root < 0.0) return NoSecondTangent{"no sign change: single linear piece"};
        x4 = root;
        const double s = Hr2s(x4, c, P);
        x3 = find_root_strict([&](double z) { return Ht3(z, c, P) - s; }, P.xc(c) * (1 + 1e-12),
                              hi3, 1e-14);
        it = -1;
    }
    TangencyPair t;
    t.x1 = x3;
    t.x2 = x4;
    ScaleMap sm(P.alpha());
    t.y1 = sm.psi(x3);
    t.y2 = sm.psi(x4);
    t.slope = Hr2s(x4, c, P);
    t.icept = Hr2t(x4, c, P);
    t.iters = it;
    return t;
}

/// Assembled one-shot solution for a fixed fuel level (small c: the
/// tangency geometry applies; the caller can fall back to the numeric
/// envelope otherwise).
struct OneShotSolution {
    double c = 0.0;
    NoFuelSolution v0;
    TangencyPair t12;
    std::optional<TangencyPair> t34;
    Problem prob;
    std::vector<MinorantPiece> pieces;

    /// Waiting intervals in the natural scale.
    std::vector<std::pair<double, double>> waiting() const {
        std::vector<std::pair<double, double>> w{{t12.x1, t12.x2}};
        if (t34) w.push_back({t34->x1, t34->x2});
        return w;
    }

    double value(double x) const {
        x = std::abs(x);
        const double quad = prob.lambda() / prob.alpha() * x * x +
                            prob.lambda() / (prob.alpha() * prob.alpha());
        if (x <= t12.x1) return prob.delta() * x * x;
        if (x < t12.x2)
            return t12.slope * std::exp(x * prob.s2a) + t12.icept * std::exp(-x * prob.s2a) + quad;
        if (t34 && x > t34->x1 && x < t34->x2)
            return t34->slope * std::exp(x * prob.s2a) + t34->icept * std::exp(-x * prob.s2a) +
                   quad;
        return v0.value(x - c) + c;
    }
};

inline OneShotSolution solve_oneshot(double c, const Problem& P) {
    if (P.cst.regime == Regime::HighCost || P.cst.regime == Regime::LegacyBelowStar)
        throw UnsupportedRegime("one-shot tangency solve requires lambda in (lambda_star, alpha*delta)");
    OneShotSolution s;
    s.c = c;
    s.prob = P;
    s.v0 = solve_V0(P);
    s.t12 = solve_tangency_12(c, P);
    if (P.cst.regime == Regime::VLambdaShape && c < P.cst.k) {
        auto r = solve_tangency_34(c, P);
        if (std::holds_alternative<TangencyPair>(r)) s.t34 = std::get<TangencyPair>(r);
    }
    auto lin = [](const TangencyPair& t) {
        MinorantPiece p;
        p.kind = MinorantPiece::Kind::Linear;
        p.y_lo = t.y1;
        p.y_hi = t.y2;
        p.slope = t.slope;
        p.icept = t.icept;
        return p;
    };
    MinorantPiece left;
    left.y_lo = 1.0;
    left.y_hi = s.t12.y1;
    s.pieces.push_back(left);
    s.pieces.push_back(lin(s.t12));
    if (s.t34) {
        MinorantPiece mid;
        mid.y_lo = s.t12.y2;
        mid.y_hi = s.t34->y1;
        s.pieces.push_back(mid);
        s.pieces.push_back(lin(*s.t34));
    }
    MinorantPiece tail;
    tail.y_lo = s.t34 ? s.t34->y2 : s.t12.y2;
    tail.y_hi = std::numeric_limits<double>::infinity();
    s.pieces.push_back(tail);
    return s;
}

/// One-shot value at arbitrary (x, c): closed form for c = 0, tangency
/// assembly when available, numeric envelope otherwise.
inline double oneshot_value(double x, double c, const Problem& P) {
    x = std::abs(x);
    if (c <= 0.0) return solve_V0(P).value(x);
    try {
        return solve_oneshot(c, P).value(x);
    } catch (const std::exception&) {
        const double x_max = std::max(P.f0(), P.cst.x_half_lambda) + c + 10.0 / P.s2a;
        auto Hfun = [&](double xn) { return std::exp(xn * P.s2a) * h_comb(xn, c, P); };
        NumericEnvelope env = convex_minorant_numeric(Hfun, P, x_max);
        const double quad =
            P.lambda() / P.alpha() * x * x + P.lambda() / (P.alpha() * P.alpha());
        if (x >= x_max) return solve_V0(P).value(x - c) + c;
        return std::exp(-x * P.s2a) * env.value(ScaleMap(P.alpha()).psi(x)) + quad;
    }
}

}  // namespace fuelctrl
