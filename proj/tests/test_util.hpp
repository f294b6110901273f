#pragma once

// Test-side numeric helpers, independent of the library's solvers: plain
// bisection, central differences and a tiny deterministic RNG.  Oracles in
// the tests are built from these.

#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>

namespace testutil {

inline double bisect(const std::function<double(double)>& f, double lo, double hi,
                     double xtol = 1e-13, int max_iter = 200) {
    double flo = f(lo), fhi = f(hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if ((flo > 0) == (fhi > 0)) throw std::runtime_error("testutil::bisect: no bracket");
    for (int i = 0; i < max_iter && hi - lo > xtol; ++i) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if (fm == 0.0) return mid;
        if ((fm > 0) == (flo > 0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

inline double fd1(const std::function<double(double)>& f, double x, double h = 1e-6) {
    return (f(x + h) - f(x - h)) / (2.0 * h);
}

inline double fd2(const std::function<double(double)>& f, double x, double h = 1e-4) {
    return (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h);
}

// splitmix64: deterministic stream for randomized property tests
struct Rng {
    uint64_t s;
    explicit Rng(uint64_t seed) : s(seed) {}
    double uniform(double lo, double hi) {
        s += 0x9e3779b97f4a7c15ULL;
        uint64_t z = s;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        z ^= z >> 31;
        return lo + (hi - lo) * ((z >> 11) * 0x1.0p-53);
    }
};

}  // namespace testutil
