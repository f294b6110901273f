#pragma once

#include <cmath>
#include <stdexcept>

#include "fuelctrl/model.hpp"
#include "fuelctrl/roots.hpp"

namespace fuelctrl {

/// Natural <-> transformed scale for Brownian motion discounted at rate alpha.
/// psi(x) = exp(2 sqrt(2a) x); phi_a, psi_a solve (L - a)u = 0 with L = d^2/dx^2 / 2.
struct ScaleMap {
    double alpha = 1.0;
    double s2a = std::sqrt(2.0);

    explicit ScaleMap(double a) : alpha(a), s2a(std::sqrt(2.0 * a)) {}

    double psi(double x) const { return std::exp(2.0 * s2a * x); }
    double psi_inv(double y) const {
        if (!(y > 0.0)) throw std::domain_error("psi_inv: y must be positive");
        const double ly = std::log(y);
        if (ly > 700.0) throw std::domain_error("psi_inv: y too large (log y > 700)");
        return ly / (2.0 * s2a);
    }
    double phi_alpha(double x) const { return std::exp(-s2a * x); }
    double psi_alpha(double x) const { return std::exp(s2a * x); }
};

// ------------------------------------------------------------------
// Obstacles in the natural scale.  All evaluations take |x| implicitly
// handled by callers; these are the raw formulas on x >= 0.
// ------------------------------------------------------------------

inline double h_l(double x, const Problem& P) {
    const double a = P.alpha(), l = P.lambda(), d = P.delta();
    return (d - l / a) * x * x - l / (a * a);
}
inline double dh_l(double x, const Problem& P) {
    return 2.0 * (P.delta() - P.lambda() / P.alpha()) * x;
}
inline double d2h_l(double, const Problem& P) {
    return 2.0 * (P.delta() - P.lambda() / P.alpha());
}

inline double h_r1(double x, double c, const Problem& P) {
    const double a = P.alpha(), l = P.lambda(), d = P.delta();
    return d * c * (c - 2.0 * x) + (d - l / a) * x * x + c - l / (a * a);
}
inline double dh_r1(double x, double c, const Problem& P) {
    const double a = P.alpha(), l = P.lambda(), d = P.delta();
    return -2.0 * d * c + 2.0 * (d - l / a) * x;
}
inline double d2h_r1(double, double, const Problem& P) {
    return 2.0 * (P.delta() - P.lambda() / P.alpha());
}

inline double h_r2(double x, double c, const Problem& P) {
    const double a = P.alpha(), l = P.lambda();
    return (l / a) * c * (c - 2.0 * x) + c + P.B0() * std::exp(-(x - c) * P.s2a);
}
inline double dh_r2(double x, double c, const Problem& P) {
    const double a = P.alpha(), l = P.lambda();
    return -2.0 * (l / a) * c - P.s2a * P.B0() * std::exp(-(x - c) * P.s2a);
}
inline double d2h_r2(double x, double c, const Problem& P) {
    return 2.0 * P.alpha() * P.B0() * std::exp(-(x - c) * P.s2a);
}

/// C^1 pasting of h_r1 / h_r2 at x = f0 + c.
inline double h_r(double x, double c, const Problem& P) {
    return x <= P.f0() + c ? h_r1(x, c, P) : h_r2(x, c, P);
}
inline double dh_r(double x, double c, const Problem& P) {
    return x <= P.f0() + c ? dh_r1(x, c, P) : dh_r2(x, c, P);
}

/// Combined obstacle h = h_l on [0, x_c], h_r beyond.
inline double h_comb(double x, double c, const Problem& P) {
    return x <= P.xc(c) ? h_l(x, P) : h_r(x, c, P);
}

// Generator residuals (L - alpha) applied to the obstacles; these control the
// convexity pattern of the transformed obstacles.
inline double gen_h_l(double x, const Problem& P) {
    const double ad = P.alpha() * P.delta();
    return P.delta() - (ad - P.lambda()) * x * x;
}
inline double gen_h_r1(double x, double c, const Problem& P) {
    const double a = P.alpha(), d = P.delta(), ad = a * d;
    return d - (ad - P.lambda()) * x * x + c * a * (d * (2.0 * x - c) - 1.0);
}
inline double gen_h_r2(double x, double c, const Problem& P) {
    return c * (P.lambda() * (2.0 * x - c) - P.alpha());
}

// ------------------------------------------------------------------
// Transformed obstacles H = Phi(h).  Evaluations are keyed on the natural
// coordinate x (= Psi^{-1}(y)) so the exponential factors never overflow;
// H(y) = e^{x sqrt(2a)} h(x),
// dH/dy = e^{-x sqrt(2a)} (h' + sqrt(2a) h) / (2 sqrt(2a)),
// d2H/dy2 = e^{-3x sqrt(2a)} (h'' - 2a h) / (8a).
// ------------------------------------------------------------------

inline double Hl(double x_of_y, const Problem& P) {
    return std::exp(x_of_y * P.s2a) * h_l(x_of_y, P);
}
inline double dHl_dy(double x_of_y, const Problem& P) {
    return std::exp(-x_of_y * P.s2a) * (dh_l(x_of_y, P) + P.s2a * h_l(x_of_y, P)) / (2.0 * P.s2a);
}
inline double d2Hl_dy2(double x_of_y, const Problem& P) {
    const double a = P.alpha();
    return std::exp(-3.0 * x_of_y * P.s2a) * (d2h_l(x_of_y, P) - 2.0 * a * h_l(x_of_y, P)) /
           (8.0 * a);
}

inline double Hr(double x_of_y, double c, const Problem& P) {
    return std::exp(x_of_y * P.s2a) * h_r(x_of_y, c, P);
}
inline double dHr_dy(double x_of_y, double c, const Problem& P) {
    return std::exp(-x_of_y * P.s2a) * (dh_r(x_of_y, c, P) + P.s2a * h_r(x_of_y, c, P)) /
           (2.0 * P.s2a);
}
inline double d2Hr_dy2(double x_of_y, double c, const Problem& P) {
    const double a = P.alpha();
    const double h = h_r(x_of_y, c, P);
    const double h2 = x_of_y <= P.f0() + c ? d2h_r1(x_of_y, c, P) : d2h_r2(x_of_y, c, P);
    return std::exp(-3.0 * x_of_y * P.s2a) * (h2 - 2.0 * a * h) / (8.0 * a);
}

/// y-scale facade; rejects y with log y > 700 via ScaleMap::psi_inv.
inline double eval_Hl(double y, const Problem& P) {
    if (y < 1.0) throw std::domain_error("eval_Hl: y must be >= 1");
    return Hl(ScaleMap(P.alpha()).psi_inv(y), P);
}
inline double eval_Hr(double y, double c, const Problem& P) {
    return Hr(ScaleMap(P.alpha()).psi_inv(y), c, P);
}

struct CriticalYs {
    double y_c = 0.0;  ///< Psi(1/(2 delta) + c/2)
    double y_r = 0.0;  ///< Psi(f0 + c)
    double y_m = 0.0;  ///< Psi(alpha/(2 lambda) + c/2)
    double y_v = 0.0;  ///< inflection of H_r1 past y_c when c > K, else y_c
    double x_v = 0.0;  ///< natural-scale location of y_v
};

/// Critical y-values of the transformed right obstacle at fuel level c.
inline CriticalYs critical_ys(double c, const Problem& P) {
    if (!(c > 0.0)) throw std::domain_error("critical_ys: c must be positive");
    ScaleMap sm(P.alpha());
    CriticalYs r;
    const double xc = P.xc(c);
    r.y_c = sm.psi(xc);
    r.y_r = sm.psi(P.f0() + c);
    r.y_m = sm.psi(P.cst.x_half_lambda + 0.5 * c);
    r.x_v = xc;
    if (c > P.cst.K) {
        // (L-a)h_r1 is concave in x, negative at x_c, positive at its vertex;
        // the sign change locates the inflection of H_r1.
        const double ad = P.alpha() * P.delta();
        const double x_max = ad * c / (ad - P.lambda());
        r.x_v = find_root_strict([&](double x) { return gen_h_r1(x, c, P); }, xc, x_max, 1e-13);
    }
    r.y_v = sm.psi(r.x_v);
    return r;
}

}  // namespace fuelctrl
