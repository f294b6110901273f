#pragma once

#include <cmath>
#include <stdexcept>

#include "fuelctrl/model.hpp"
#include "fuelctrl/roots.hpp"
#include "fuelctrl/transform.hpp"

namespace fuelctrl {

// Tangent machinery for the transformed obstacles.  For a natural-scale
// obstacle g, the line tangent to Phi(g) at y = Psi(x) has
//   slope     S[g](x)  = e^{-x s} (g' + s g) / (2s)
//   intercept T[g](x)  = e^{+x s} (-g' + s g) / (2s)
// with s = sqrt(2 alpha).  h1/h2 are S/T for the left obstacle, Ht3/Ht4 for
// h_r1, Hr2s/Hr2t for h_r2.

inline double h1(double x, const Problem& P) {
    const double a = P.alpha();
    return (a * P.delta() - P.lambda()) / (2.0 * a) * std::exp(-x * P.s2a) * rho(x, P.par);
}
inline double dh1(double x, const Problem& P) {
    const double a = P.alpha();
    const double drho = 2.0 * x + 2.0 / P.s2a;
    return (a * P.delta() - P.lambda()) / (2.0 * a) * std::exp(-x * P.s2a) *
           (drho - P.s2a * rho(x, P.par));
}

inline double h2(double x, const Problem& P) {
    const double a = P.alpha();
    return (a * P.delta() - P.lambda()) / (2.0 * a) * std::exp(x * P.s2a) *
           (rho(x, P.par) - 4.0 * x / P.s2a);
}
inline double dh2(double x, const Problem& P) {
    const double a = P.alpha();
    const double drho = 2.0 * x + 2.0 / P.s2a;
    return (a * P.delta() - P.lambda()) / (2.0 * a) * std::exp(x * P.s2a) *
           (P.s2a * (rho(x, P.par) - 4.0 * x / P.s2a) + drho - 4.0 / P.s2a);
}

inline double h3(double x, const Problem& P) {
    const double l = P.lambda(), a = P.alpha();
    return l / a * (P.cst.x_half_lambda - x - 1.0 / P.s2a) * std::exp(-x * P.s2a);
}
inline double dh3(double x, const Problem& P) {
    return P.s2a * P.lambda() / P.alpha() * (x - P.cst.x_half_lambda) * std::exp(-x * P.s2a);
}

inline double h4(double x, const Problem& P) {
    const double l = P.lambda(), a = P.alpha();
    return l / a * (x - P.cst.x_half_lambda - 1.0 / P.s2a) * std::exp(x * P.s2a);
}
inline double dh4(double x, const Problem& P) {
    return P.s2a * P.lambda() / P.alpha() * (x - P.cst.x_half_lambda) * std::exp(x * P.s2a);
}

// --- tangent coefficients of H_r1 ------------------------------------------

inline double Ht3(double x, double c, const Problem& P) {
    const double a = P.alpha(), d = P.delta(), l = P.lambda();
    return std::exp(-x * P.s2a) *
           (0.5 * d * c * c + c * (0.5 - d * (1.0 / P.s2a + x)) +
            (d - l / a) * x * (0.5 * x + 1.0 / P.s2a) - l / (2.0 * a * a));
}
inline double dHt3_dx(double x, double c, const Problem& P) {
    const double a = P.alpha(), d = P.delta(), l = P.lambda();
    const double inner = 0.5 * d * c * c + c * (0.5 - d * (1.0 / P.s2a + x)) +
                         (d - l / a) * x * (0.5 * x + 1.0 / P.s2a) - l / (2.0 * a * a);
    const double dinner = -c * d + (d - l / a) * (x + 1.0 / P.s2a);
    return std::exp(-x * P.s2a) * (dinner - P.s2a * inner);
}
inline double dHt3_dc(double x, double c, const Problem& P) {
    const double d = P.delta();
    return std::exp(-x * P.s2a) * (d * c + 0.5 - d * (1.0 / P.s2a + x));
}

inline double Ht4(double x, double c, const Problem& P) {
    const double a = P.alpha(), d = P.delta(), l = P.lambda();
    return std::exp(x * P.s2a) *
           (0.5 * d * c * c + c * (0.5 + d * (1.0 / P.s2a - x)) +
            (d - l / a) * x * (0.5 * x - 1.0 / P.s2a) - l / (2.0 * a * a));
}
inline double dHt4_dx(double x, double c, const Problem& P) {
    const double a = P.alpha(), d = P.delta(), l = P.lambda();
    const double inner = 0.5 * d * c * c + c * (0.5 + d * (1.0 / P.s2a - x)) +
                         (d - l / a) * x * (0.5 * x - 1.0 / P.s2a) - l / (2.0 * a * a);
    const double dinner = -c * d + (d - l / a) * (x - 1.0 / P.s2a);
    return std::exp(x * P.s2a) * (dinner + P.s2a * inner);
}
inline double dHt4_dc(double x, double c, const Problem& P) {
    const double d = P.delta();
    return std::exp(x * P.s2a) * (d * c + 0.5 + d * (1.0 / P.s2a - x));
}

// --- tangent coefficients of H_r2 ------------------------------------------
// The B0 terms cancel in the slope and contribute the constant B0 e^{c s}
// to the intercept.

inline double Hr2s(double x, double c, const Problem& P) {
    const double a = P.alpha(), l = P.lambda();
    return std::exp(-x * P.s2a) *
           (0.5 * (l / a) * c * (c - 2.0 * x) + 0.5 * c - l * c / (a * P.s2a));
}
inline double dHr2s_dx(double x, double c, const Problem& P) {
    const double a = P.alpha(), l = P.lambda();
    const double inner = 0.5 * (l / a) * c * (c - 2.0 * x) + 0.5 * c - l * c / (a * P.s2a);
    return std::exp(-x * P.s2a) * (-(l / a) * c - P.s2a * inner);
}
inline double Hr2t(double x, double c, const Problem& P) {
    const double a = P.alpha(), l = P.lambda();
    return std::exp(x * P.s2a) *
               (0.5 * (l / a) * c * (c - 2.0 * x) + 0.5 * c + l * c / (a * P.s2a)) +
           P.B0() * std::exp(c * P.s2a);
}
inline double dHr2t_dx(double x, double c, const Problem& P) {
    const double a = P.alpha(), l = P.lambda();
    const double inner = 0.5 * (l / a) * c * (c - 2.0 * x) + 0.5 * c + l * c / (a * P.s2a);
    return std::exp(x * P.s2a) * (-(l / a) * c + P.s2a * inner);
}

// --- q, q~ and the root map X ----------------------------------------------

inline double q_fn(double x, double z, const Problem& P) {
    return P.s2a * (h2(z, P) - h1(z, P) * std::exp(2.0 * z * P.s2a)) +
           h3(x, P) * std::exp(2.0 * z * P.s2a) - h4(x, P);
}
inline double dq_dx(double x, double z, const Problem& P) {
    return dh3(x, P) * std::exp(2.0 * z * P.s2a) - dh4(x, P);
}
inline double dq_dz(double x, double z, const Problem& P) {
    const double e2z = std::exp(2.0 * z * P.s2a);
    return P.s2a * (dh2(z, P) - (dh1(z, P) + 2.0 * P.s2a * h1(z, P)) * e2z) +
           2.0 * P.s2a * h3(x, P) * e2z;
}

/// q(z;z) = e^{z s}(1 - 2 delta z), used to form q~.
inline double q_diag(double z, const Problem& P) {
    return std::exp(z * P.s2a) * (1.0 - 2.0 * P.delta() * z);
}

inline double q_tilde(double x, double z, const Problem& P) {
    return q_fn(x, z, P) - q_diag(z, P);
}

/// The map X: for z in (1/(2d), a/(2l)) the unique root of q~(.;z) above z;
/// identity for z >= a/(2l).  q~ rises to its maximum at a/(2l), then falls.
inline double chi(double z, const Problem& P) {
    const double A = P.cst.x_half_lambda;
    if (!(z > P.cst.x_half_delta)) throw std::domain_error("chi: z must exceed 1/(2 delta)");
    if (z >= A) return z;
    const double ub = std::min(A + 1.0 / P.s2a, P.alpha() / P.lambda() - z);
    // near z = alpha/(2 lambda) the admissible interval collapses onto A
    if (ub - A < 1e-9) return 0.5 * (A + ub);
    if (q_tilde(A, z, P) <= 0.0) return A;
    if (q_tilde(ub, z, P) >= 0.0) return ub;  // rounding at the degenerate corner
    return find_root_strict([&](double x) { return q_tilde(x, z, P); }, A, ub, 1e-14);
}

/// Root of q(.;z) above a/(2l); exists when q(a/(2l); z) > 0.
inline double q_root_above(double z, const Problem& P) {
    const double A = P.cst.x_half_lambda;
    const double ub = A + 1.0 / P.s2a;
    if (!(q_fn(A, z, P) > 0.0)) throw std::runtime_error("q_root_above: no positive max");
    double hi = ub;
    if (q_fn(hi, z, P) >= 0.0) {
        // widen until sign change; q -> -inf as x grows
        for (int i = 0; i < 60 && q_fn(hi, z, P) >= 0.0; ++i) hi += 1.0 / P.s2a;
    }
    return find_root_strict([&](double x) { return q_fn(x, z, P); }, A, hi, 1e-14);
}

/// Inverse of h1 on [0, f0] (where the left tangent slope is increasing).
inline double h1_inv(double w, const Problem& P) {
    const double lo_val = h1(0.0, P);  // = -lambda/(2 alpha^2)
    if (w < lo_val || w > 0.0) throw std::domain_error("h1_inv: slope outside [h1(0), 0]");
    if (w == 0.0) return P.f0();
    return find_root_strict([&](double x) { return h1(x, P) - w; }, 0.0, P.f0(), 1e-14);
}

/// L(x,c) = Ht4(x,c) - h2(h1^{-1}(Ht3(x,c))), and its x-derivative
/// dL/dx = (e^{2 z s} - e^{2 x s}) dHt3/dx with z = h1^{-1}(Ht3).
inline double L_fn(double x, double c, const Problem& P) {
    const double z = h1_inv(Ht3(x, c, P), P);
    return Ht4(x, c, P) - h2(z, P);
}
inline double dL_dx(double x, double c, const Problem& P) {
    const double z = h1_inv(Ht3(x, c, P), P);
    return (std::exp(2.0 * z * P.s2a) - std::exp(2.0 * x * P.s2a)) * dHt3_dx(x, c, P);
}

}  // namespace fuelctrl
