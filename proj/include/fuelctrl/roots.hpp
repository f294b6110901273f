#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>

namespace fuelctrl {

struct RootResult {
    double x = 0.0;
    double fx = 0.0;
    int iters = 0;
    bool converged = false;
};

/// Safeguarded scalar root finder on a bracket [a,b] with f(a)*f(b) <= 0.
/// Secant steps when they stay inside the bracket, bisection otherwise.
/// Terminates on |b-a| <= xtol (absolute tolerance on the root location).
template <class F>
RootResult find_root(F&& f, double a, double b, double xtol = 1e-12, int max_iter = 200) {
    double fa = f(a);
    double fb = f(b);
    if (fa == 0.0) return {a, 0.0, 0, true};
    if (fb == 0.0) return {b, 0.0, 0, true};
    if ((fa > 0) == (fb > 0))
        throw std::invalid_argument("find_root: root not bracketed on [" + std::to_string(a) +
                                    ", " + std::to_string(b) + "]");
    double x = b, fx = fb;
    for (int it = 1; it <= max_iter; ++it) {
        const double mid = 0.5 * (a + b);
        double cand = mid;
        // secant on even iterations only, so the bracket provably shrinks
        if ((it & 1) == 0 && fb != fa) {
            const double s = b - fb * (b - a) / (fb - fa);
            const double w = std::abs(b - a);
            if (s > std::min(a, b) + 1e-3 * w && s < std::max(a, b) - 1e-3 * w) cand = s;
        }
        x = cand;
        fx = f(x);
        if (fx == 0.0) return {x, fx, it, true};
        if ((fx > 0) == (fa > 0)) {
            a = x;
            fa = fx;
        } else {
            b = x;
            fb = fx;
        }
        if (std::abs(b - a) <= xtol) {
            if (std::abs(fb) < std::abs(fa)) {
                x = b;
                fx = fb;
            } else {
                x = a;
                fx = fa;
            }
            return {x, fx, it, true};
        }
    }
    return {x, fx, max_iter, false};
}

/// Version that throws on non-convergence; used where failure indicates a bug.
template <class F>
double find_root_strict(F&& f, double a, double b, double xtol = 1e-12, int max_iter = 200) {
    RootResult r = find_root(std::forward<F>(f), a, b, xtol, max_iter);
    if (!r.converged) throw std::runtime_error("find_root: no convergence");
    return r.x;
}

}  // namespace fuelctrl
