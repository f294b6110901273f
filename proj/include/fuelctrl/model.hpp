#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "fuelctrl/roots.hpp"

namespace fuelctrl {

struct ProblemParams {
    double lambda = 1.0;  ///< running-cost coefficient, > 0
    double alpha = 1.0;   ///< discount rate, > 0
    double delta = 1.0;   ///< terminal-cost coefficient, > 0

    void validate() const {
        if (!(lambda > 0.0) || !std::isfinite(lambda))
            throw std::invalid_argument("lambda must be positive");
        if (!(alpha > 0.0) || !std::isfinite(alpha))
            throw std::invalid_argument("alpha must be positive");
        if (!(delta > 0.0) || !std::isfinite(delta))
            throw std::invalid_argument("delta must be positive");
    }
};

enum class Regime {
    HighCost,         ///< lambda >= alpha*delta: stop/act only, vertical boundary
    VShape,           ///< lambda in [lambda_dagger, alpha*delta)
    VLambdaShape,     ///< lambda in (lambda_star, lambda_dagger)
    LegacyBelowStar,  ///< lambda <= lambda_star: classified, full solve unsupported
};

inline const char* regime_name(Regime r) {
    switch (r) {
        case Regime::HighCost: return "high-cost";
        case Regime::VShape: return "v-shape";
        case Regime::VLambdaShape: return "v-lambda-shape";
        case Regime::LegacyBelowStar: return "legacy-below-star";
    }
    return "?";
}

/// Thrown when a full boundary solve is requested for lambda <= lambda_star.
struct UnsupportedRegime : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// rho(x) = x^2 + 2x/sqrt(2a) - (l/a)/(a d - l). Negative on [0,f0), positive above.
inline double rho(double x, const ProblemParams& p) {
    const double ad = p.alpha * p.delta;
    if (ad == p.lambda) throw std::domain_error("rho: lambda == alpha*delta is degenerate");
    return x * x + 2.0 * x / std::sqrt(2.0 * p.alpha) - (p.lambda / p.alpha) / (ad - p.lambda);
}

/// Positive root of rho; the no-fuel free boundary. Requires lambda < alpha*delta.
inline double f0(const ProblemParams& p) {
    const double ad = p.alpha * p.delta;
    if (!(p.lambda < ad)) throw std::domain_error("f0: requires lambda < alpha*delta");
    return (std::sqrt((ad + p.lambda) / (ad - p.lambda)) - 1.0) / std::sqrt(2.0 * p.alpha);
}

inline double lambda_star(double alpha, double delta) {
    if (!(alpha > 0.0) || !(delta > 0.0))
        throw std::invalid_argument("lambda_star: alpha, delta must be positive");
    return alpha * delta / (1.0 + (delta / alpha) / (1.0 / (4.0 * delta) + 1.0 / std::sqrt(2.0 * alpha)));
}

/// Unique root of f0(l) = alpha/(2 l) in (lambda_star, alpha*delta).
inline double lambda_dagger(double alpha, double delta) {
    const double ls = lambda_star(alpha, delta);
    const double ad = alpha * delta;
    auto g = [&](double l) {
        ProblemParams p{l, alpha, delta};
        return f0(p) - alpha / (2.0 * l);
    };
    // f0 - a/(2l) is increasing in l; negative just above lambda_star, positive near alpha*delta
    double lo = ls * (1.0 + 1e-14);
    double hi = ad * (1.0 - 1e-12);
    if (g(lo) >= 0.0 || g(hi) <= 0.0)
        throw std::runtime_error("lambda_dagger: bracket failure");
    return find_root_strict(g, lo, hi, 1e-12 * ad);
}

inline Regime classify(const ProblemParams& p) {
    p.validate();
    const double ad = p.alpha * p.delta;
    if (p.lambda >= ad) return Regime::HighCost;
    const double ls = lambda_star(p.alpha, p.delta);
    if (p.lambda <= ls) return Regime::LegacyBelowStar;
    const double ld = lambda_dagger(p.alpha, p.delta);
    if (p.lambda >= ld) return Regime::VShape;
    return Regime::VLambdaShape;
}

struct RegimeConstants {
    double f0 = std::numeric_limits<double>::quiet_NaN();
    double lambda_star = 0.0;
    double lambda_dagger = 0.0;
    double x_half_delta = 0.0;   ///< 1/(2 delta)
    double x_half_lambda = 0.0;  ///< alpha/(2 lambda)
    double K = std::numeric_limits<double>::quiet_NaN();
    double k = std::numeric_limits<double>::quiet_NaN();
    double k_bar = 0.0;  ///< alpha/(2 lambda) - 1/(2 delta)
    double B0 = std::numeric_limits<double>::quiet_NaN();
    Regime regime = Regime::HighCost;
    bool boundary_case = false;  ///< lambda numerically at lambda_star or lambda_dagger
};

inline RegimeConstants regime_constants(const ProblemParams& p) {
    p.validate();
    RegimeConstants c;
    const double ad = p.alpha * p.delta;
    const double s2a = std::sqrt(2.0 * p.alpha);
    c.lambda_star = lambda_star(p.alpha, p.delta);
    c.lambda_dagger = lambda_dagger(p.alpha, p.delta);
    c.x_half_delta = 1.0 / (2.0 * p.delta);
    c.x_half_lambda = p.alpha / (2.0 * p.lambda);
    c.k_bar = c.x_half_lambda - c.x_half_delta;
    c.regime = classify(p);
    const double rel = 1e-10 * ad;
    c.boundary_case =
        std::abs(p.lambda - c.lambda_star) < rel || std::abs(p.lambda - c.lambda_dagger) < rel;
    if (p.lambda < ad) {
        c.f0 = f0(p);
        c.K = 2.0 * (std::sqrt(p.delta / (ad - p.lambda)) - c.x_half_delta);
        c.k = 2.0 * (c.x_half_lambda - c.f0);
        c.B0 = -2.0 * c.f0 / (p.alpha * s2a) * (ad - p.lambda) * std::exp(c.f0 * s2a);
    }
    return c;
}

/// Inequality chain realized by the classification, e.g. "1/(2d) < a/(2l) <= f0".
inline std::string inequality_chain(const ProblemParams& p) {
    switch (classify(p)) {
        case Regime::HighCost: return "lambda >= alpha*delta";
        case Regime::VShape: return "1/(2*delta) < alpha/(2*lambda) <= f0";
        case Regime::VLambdaShape: return "1/(2*delta) < f0 < alpha/(2*lambda)";
        case Regime::LegacyBelowStar: return "f0 <= 1/(2*delta)";
    }
    return "";
}

/// Parameters plus all derived constants; the handle passed throughout the library.
struct Problem {
    ProblemParams par;
    RegimeConstants cst;
    double s2a = 0.0;  ///< sqrt(2 alpha)

    double lambda() const { return par.lambda; }
    double alpha() const { return par.alpha; }
    double delta() const { return par.delta; }
    double f0() const { return cst.f0; }
    double B0() const { return cst.B0; }
    double xc(double c) const { return cst.x_half_delta + 0.5 * c; }  ///< h-crossing point
};

inline Problem make_problem(const ProblemParams& p) {
    Problem pr;
    pr.par = p;
    pr.cst = regime_constants(p);
    pr.s2a = std::sqrt(2.0 * p.alpha);
    return pr;
}

inline Problem make_problem(double lambda, double alpha, double delta) {
    return make_problem(ProblemParams{lambda, alpha, delta});
}

}  // namespace fuelctrl
