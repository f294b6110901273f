#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "fuelctrl/model.hpp"
#include "fuelctrl/transform.hpp"

namespace fuelctrl {

struct MinorantPiece {
    enum class Kind { Obstacle, Linear };
    Kind kind = Kind::Obstacle;
    double y_lo = 0.0, y_hi = 0.0;
    double slope = 0.0, icept = 0.0;  // for linear pieces: W = slope*y + icept
};

/// Discrete greatest non-positive convex minorant of a transformed obstacle,
/// sampled uniformly in the natural scale (log-spaced in y).
struct NumericEnvelope {
    std::vector<double> x, y, H, W;
    std::vector<char> contact;  // |W - H| within contact tolerance
    std::vector<MinorantPiece> pieces;

    double value(double yq) const {
        if (hull_y.empty()) throw std::runtime_error("envelope not built");
        if (yq <= hull_y.front()) return hull_w.front();
        if (yq >= hull_y.back()) return hull_w.back();
        auto it = std::upper_bound(hull_y.begin(), hull_y.end(), yq);
        size_t i = static_cast<size_t>(it - hull_y.begin());
        const double t = (yq - hull_y[i - 1]) / (hull_y[i] - hull_y[i - 1]);
        return hull_w[i - 1] + t * (hull_w[i] - hull_w[i - 1]);
    }

    std::vector<double> hull_y, hull_w;
};

/// Hfun takes the natural coordinate x and returns H(Psi(x)).  The envelope is
/// computed on x in [0, x_max].  When the clipped obstacle returns to zero at
/// the right edge (no-fuel case), the hull is extended by a constant at its
/// minimum vertex, which is the exact infinite-domain behaviour.  When the
/// obstacle instead diverges to -inf, the last sample must be in contact,
/// otherwise x_max was too small.
inline NumericEnvelope convex_minorant_numeric(const std::function<double(double)>& Hfun,
                                               const Problem& P, double x_max, int n = 20000,
                                               double contact_tol = 1e-7) {
    if (n < 10000) n = 10000;
    NumericEnvelope env;
    env.x.resize(n);
    env.y.resize(n);
    env.H.resize(n);
    ScaleMap sm(P.alpha());
    for (int i = 0; i < n; ++i) {
        const double xi = x_max * i / (n - 1);
        env.x[i] = xi;
        env.y[i] = sm.psi(xi);
        env.H[i] = Hfun(xi);
    }
    // lower convex hull of (y, min(H,0)) via monotone chain
    std::vector<int> hull;
    hull.reserve(256);
    auto g = [&](int i) { return std::min(env.H[i], 0.0); };
    for (int i = 0; i < n; ++i) {
        while (hull.size() >= 2) {
            const int a = hull[hull.size() - 2], b = hull.back();
            const long double cross =
                (static_cast<long double>(g(b)) - g(a)) * (static_cast<long double>(env.y[i]) - env.y[a]) -
                (static_cast<long double>(g(i)) - g(a)) * (static_cast<long double>(env.y[b]) - env.y[a]);
            if (cross >= 0.0L)
                hull.pop_back();
            else
                break;
        }
        hull.push_back(i);
    }
    // terminal handling
    const bool clipped_tail = env.H[n - 1] >= 0.0;
    size_t cut = hull.size();
    if (clipped_tail) {
        // drop trailing segments of positive slope; extend constant from the minimum vertex
        while (cut >= 2 && g(hull[cut - 1]) > g(hull[cut - 2])) --cut;
    }
    env.hull_y.clear();
    env.hull_w.clear();
    for (size_t j = 0; j < cut; ++j) {
        env.hull_y.push_back(env.y[hull[j]]);
        env.hull_w.push_back(g(hull[j]));
    }
    if (clipped_tail && env.hull_y.back() < env.y[n - 1]) {
        env.hull_y.push_back(env.y[n - 1]);
        env.hull_w.push_back(env.hull_w.back());
    }
    env.W.resize(n);
    env.contact.resize(n);
    for (int i = 0; i < n; ++i) {
        env.W[i] = env.value(env.y[i]);
        env.contact[i] = std::abs(env.W[i] - env.H[i]) < contact_tol * (1.0 + std::abs(env.H[i]));
    }
    if (!clipped_tail && !env.contact[n - 1])
        throw std::runtime_error("convex_minorant_numeric: tail not resolved, enlarge x_max");

    // piece list: runs of contact / non-contact
    int i = 0;
    while (i < n) {
        MinorantPiece p;
        const bool on = env.contact[i];
        int j = i;
        while (j < n && static_cast<bool>(env.contact[j]) == on) ++j;
        p.kind = on ? MinorantPiece::Kind::Obstacle : MinorantPiece::Kind::Linear;
        p.y_lo = env.y[i == 0 ? 0 : i - 1];
        p.y_hi = env.y[j == n ? n - 1 : j];
        if (!on) {
            const int a = std::max(i - 1, 0), b = std::min(j, n - 1);
            p.slope = (env.W[b] - env.W[a]) / (env.y[b] - env.y[a]);
            p.icept = env.W[a] - p.slope * env.y[a];
        }
        env.pieces.push_back(p);
        i = j;
    }
    return env;
}

/// Endpoints of the k-th linear piece, refined to the exact double tangency:
/// starting from the hull chord, alternately minimise H - (A y + B) near each
/// endpoint and refit the line through the two minimisers (secant iteration
/// on the common tangent).  Uses only H evaluations.
inline std::pair<double, double> refine_linear_piece(const NumericEnvelope& env,
                                                     const std::function<double(double)>& Hfun,
                                                     const Problem& P, size_t piece_index) {
    const MinorantPiece& p = env.pieces.at(piece_index);
    if (p.kind != MinorantPiece::Kind::Linear)
        throw std::invalid_argument("refine_linear_piece: not a linear piece");
    ScaleMap sm(P.alpha());
    double A = p.slope, B = p.icept;
    auto golden_min = [&](double a, double b) {
        auto gap = [&](double x) { return Hfun(x) - (A * sm.psi(x) + B); };
        const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
        double c1 = b - gr * (b - a), c2 = a + gr * (b - a);
        double f1 = gap(c1), f2 = gap(c2);
        for (int it = 0; it < 200 && (b - a) > 1e-14; ++it) {
            if (f1 < f2) {
                b = c2;
                c2 = c1;
                f2 = f1;
                c1 = b - gr * (b - a);
                f1 = gap(c1);
            } else {
                a = c1;
                c1 = c2;
                f1 = f2;
                c2 = a + gr * (b - a);
                f2 = gap(c2);
            }
        }
        return 0.5 * (a + b);
    };
    const double dx = env.x[1] - env.x[0];
    // widen the search window when the minimiser pins to its edge (flat
    // curvature shifts the tangency point by many cells)
    auto robust_min = [&](double x0) {
        double w = 2.0 * dx;
        for (int widen = 0; widen < 12; ++widen) {
            const double lo = std::max(0.0, x0 - w), hi = std::min(x0 + w, env.x.back());
            const double xm = golden_min(lo, hi);
            if (xm - lo > 0.02 * w && hi - xm > 0.02 * w) return xm;
            x0 = xm;
            w *= 4.0;
        }
        return x0;
    };
    double xa = sm.psi_inv(p.y_lo), xb = sm.psi_inv(p.y_hi);
    for (int pass = 0; pass < 8; ++pass) {
        xa = robust_min(xa);
        xb = robust_min(xb);
        const double ya = sm.psi(xa), yb = sm.psi(xb);
        const double An = (Hfun(xb) - Hfun(xa)) / (yb - ya);
        const double Bn = Hfun(xa) - An * ya;
        const bool done = std::abs(An - A) < 1e-15 * (1.0 + std::abs(A)) &&
                          std::abs(Bn - B) < 1e-14 * (1.0 + std::abs(B));
        A = An;
        B = Bn;
        if (done) break;
    }
    return {sm.psi(xa), sm.psi(xb)};
}

}  // namespace fuelctrl
