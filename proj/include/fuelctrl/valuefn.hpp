#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>

#include "fuelctrl/boundaries.hpp"

namespace fuelctrl {

enum class Region { I, II, III, IVa, IVb, IVc };

inline const char* region_name(Region r) {
    switch (r) {
        case Region::I: return "I";
        case Region::II: return "II";
        case Region::III: return "III";
        case Region::IVa: return "IVa";
        case Region::IVb: return "IVb";
        case Region::IVc: return "IVc";
    }
    return "?";
}

struct RegionInfo {
    Region tag = Region::I;
    double zeta = 0.0;  // acting displacement, meaningful in IV
};

/// Candidate value function assembled from the solved boundaries.  Evaluation
/// is even in x.  All partial derivatives are closed-form per region; the
/// acting region delegates to the landing point of the diagonal shift.
class PiecewiseValue {
  public:
    explicit PiecewiseValue(Solution sol) : s_(std::move(sol)) {}

    const Solution& solution() const { return s_; }
    const Problem& problem() const { return s_.prob; }

    /// Boundary data of one fuel level; build once per c when sweeping rows.
    struct Slice {
        double c = 0.0;
        bool high_cost = false;
        // (F, G) data
        double F = 0, G = 0, Fp = 0, Gp = 0;
        double A = 0, B = 0, C = 0, D = 0;
        // lambda region (only when 0 < c < c_I)
        bool has_bar = false;
        double Fbar = 0, Gbar = 0, At = 0, Bt = 0, Ct = 0, Dt = 0;
        // IV sub-region frontiers
        double iva_limit = -kInf;  // G(c_bar) + c - c_bar when c > c_bar
        double Dline = kInf;       // D(c) for c >= c_I in the v-lambda regime
        double g0c = kInf;         // g0 + c in the v-lambda regime
    };

    Slice slice(double c) const {
        Slice sl;
        sl.c = c;
        const Problem& P = s_.prob;
        if (c <= 0.0) return sl;  // no fuel: evaluation delegates to v0
        if (!s_.fg) {
            sl.high_cost = true;
            sl.F = sl.G = P.cst.x_half_delta;
            return sl;
        }
        auto pt = s_.fg->at(c);
        sl.F = pt.F;
        sl.G = pt.G;
        sl.Fp = pt.Fp;
        sl.Gp = pt.Gp;
        sl.A = h1(pt.F, P);
        sl.B = h2(pt.F, P);
        auto [C, D] = s_.fg->U_coeffs(c);
        sl.C = C;
        sl.D = D;
        if (s_.bar) {
            if (c < s_.bar->c_I) {
                sl.has_bar = true;
                sl.Fbar = s_.bar->Fbar(c);
                sl.Gbar = s_.bar->Gbar(c);
                sl.At = s_.bar->Atilde(c);
                sl.Bt = s_.bar->Btilde(c);
                sl.Ct = s_.bar->Ctilde(c);
                sl.Dt = s_.bar->Dtilde(c);
            } else {
                sl.Dline = s_.bar->D(c);
            }
            sl.g0c = s_.bar->g0 + c;
        }
        if (c > s_.fg->c_bar) sl.iva_limit = s_.fg->G_at_cbar + (c - s_.fg->c_bar);
        return sl;
    }

    RegionInfo classify(double x, double c) const { return classify(std::abs(x), slice(c)); }

    RegionInfo classify(double x, const Slice& sl) const {
        x = std::abs(x);
        RegionInfo r;
        if (sl.c <= 0.0) {
            r.tag = x <= s_.v0.edge ? Region::I : Region::II;
            return r;
        }
        if (sl.high_cost) {
            const double edge = s_.prob.cst.x_half_delta;
            if (x <= edge) {
                r.tag = Region::I;
                return r;
            }
            r.zeta = std::min(x - edge, sl.c);
            r.tag = r.zeta >= sl.c ? Region::IVc : Region::IVa;
            return r;
        }
        if (x <= sl.F) {
            r.tag = Region::I;
            return r;
        }
        if (x <= sl.G) {
            r.tag = Region::II;
            return r;
        }
        if (sl.has_bar && x > sl.Fbar && x <= sl.Gbar) {
            r.tag = Region::III;
            return r;
        }
        auto z = zeta(x, sl);
        r.zeta = z.first;
        r.tag = z.second;
        return r;
    }

    /// Acting displacement and the IV sub-tag for x >= G(c).
    std::pair<double, Region> zeta(double x, const Slice& sl) const {
        double best = sl.c;
        Region tag = Region::IVc;
        const FGSolution* fg = s_.fg.get();
        if (fg && sl.c > fg->c_bar && x < sl.iva_limit) {
            // diagonal shift onto the reflecting part of G
            const double cb = fg->c_bar;
            auto phi = [&](double u) { return fg->G_interp(sl.c - u) - (x - u); };
            double u;
            if (phi(0.0) >= 0.0)
                u = 0.0;
            else
                u = find_root_strict(phi, 0.0, sl.c - cb, 1e-13);
            if (u < best) {
                best = u;
                tag = Region::IVa;
            }
        }
        if (s_.bar) {
            auto u = s_.bar->zeta_to_gbar(x, sl.c);
            if (u && *u < best) {
                best = *u;
                tag = Region::IVb;
            }
        }
        return {best, tag};
    }

    double zeta(double x, double c) const { return zeta(std::abs(x), slice(c)).first; }

    // ---- evaluation ------------------------------------------------------

    double value(double x, double c) const { return value(x, slice(c)); }

    double value(double x, const Slice& sl) const {
        x = std::abs(x);
        if (sl.c <= 0.0) return s_.v0.value(x);
        if (sl.high_cost) {
            const double u = std::clamp(x - s_.prob.cst.x_half_delta, 0.0, sl.c);
            const double d = s_.prob.delta();
            return std::min(d * x * x, u + d * (x - u) * (x - u));
        }
        const RegionInfo r = classify(x, sl);
        return eval_region(x, sl, r);
    }

    double dx(double x, double c) const { return dx(x, slice(c)); }
    double dc(double x, double c) const { return dc(x, slice(c)); }
    double dxx(double x, double c) const { return dxx(x, slice(c)); }

    /// Marginal U = (d/dx + d/dc) Q.
    double U(double x, const Slice& sl) const { return dx(x, sl) + dc(x, sl); }
    double U(double x, double c) const { return U(x, slice(c)); }

    /// dU/dx inside II / III (strictly concave in x there).
    double dU_dx(double x, const Slice& sl) const {
        x = std::abs(x);
        const Problem& P = s_.prob;
        const RegionInfo r = classify(x, sl);
        const double s = P.s2a;
        if (r.tag == Region::II)
            return 2.0 * P.lambda() / P.alpha() +
                   s * (sl.C * std::exp(x * s) - sl.D * std::exp(-x * s));
        if (r.tag == Region::III)
            return 2.0 * P.lambda() / P.alpha() +
                   s * (sl.Ct * std::exp(x * s) - sl.Dt * std::exp(-x * s));
        if (r.tag == Region::I) return 2.0 * P.delta();
        return 0.0;  // U == 1 in the interior of IV
    }

    /// Convexified repulsion obstacle h_r*(x;c) for c > c_I.
    double hstar_r(double x, double c) const {
        if (!s_.bar) throw std::logic_error("hstar_r: defined in the v-lambda regime");
        if (!(c > s_.bar->c_I)) throw std::domain_error("hstar_r: requires c > c_I");
        x = std::abs(x);
        if (x <= s_.bar->D(c) || x >= s_.bar->g0 + c) return h_r(x, c, s_.prob);
        return s_.bar->hstar(x, c).h;
    }

    /// Supersolution residual (L - alpha) Q + lambda x^2, closed form per region.
    double generator_residual(double x, const Slice& sl) const {
        x = std::abs(x);
        const Problem& P = s_.prob;
        if (sl.c <= 0.0)
            return x <= s_.v0.edge
                       ? P.delta() + (P.lambda() - P.alpha() * P.delta()) * x * x
                       : 0.0;
        if (sl.high_cost) {
            const RegionInfo r = classify(x, sl);
            if (r.tag == Region::I)
                return P.delta() + (P.lambda() - P.alpha() * P.delta()) * x * x;
            if (r.tag == Region::IVa)  // linear partial-shot profile
                return P.lambda() * x * x - P.alpha() * (x - 0.25 / P.delta());
            const double xi = x - sl.c;
            return P.delta() - P.alpha() * (sl.c + P.delta() * xi * xi) + P.lambda() * x * x;
        }
        const RegionInfo r = classify(x, sl);
        switch (r.tag) {
            case Region::I:
                return P.delta() + (P.lambda() - P.alpha() * P.delta()) * x * x;
            case Region::II:
            case Region::III:
                return 0.0;
            case Region::IVa: {
                const double land = x - r.zeta;
                return 2.0 * P.lambda() * r.zeta * (land - P.cst.x_half_lambda) +
                       P.lambda() * r.zeta * r.zeta;
            }
            case Region::IVb: {
                const double land = x - r.zeta;
                return 2.0 * P.lambda() * r.zeta * (land - P.cst.x_half_lambda) +
                       P.lambda() * r.zeta * r.zeta;
            }
            case Region::IVc:
                return gen_h_r(x, sl.c);
        }
        return 0.0;
    }

  private:
    double gen_h_r(double x, double c) const {
        return x <= s_.prob.f0() + c ? gen_h_r1(x, c, s_.prob) : gen_h_r2(x, c, s_.prob);
    }

    double eval_region(double x, const Slice& sl, const RegionInfo& r) const {
        const Problem& P = s_.prob;
        const double quad =
            P.lambda() / P.alpha() * x * x + P.lambda() / (P.alpha() * P.alpha());
        switch (r.tag) {
            case Region::I:
                return P.delta() * x * x;
            case Region::II:
                return sl.A * std::exp(x * P.s2a) + sl.B * std::exp(-x * P.s2a) + quad;
            case Region::III:
                return sl.At * std::exp(x * P.s2a) + sl.Bt * std::exp(-x * P.s2a) + quad;
            case Region::IVc:
                return s_.v0.value(x - sl.c) + sl.c;
            case Region::IVa: {
                const double theta = sl.c - r.zeta, xi = x - r.zeta;
                const Slice land = slice(theta);
                const double q2 = P.lambda() / P.alpha() * xi * xi +
                                  P.lambda() / (P.alpha() * P.alpha());
                return land.A * std::exp(xi * P.s2a) + land.B * std::exp(-xi * P.s2a) + q2 +
                       r.zeta;
            }
            case Region::IVb: {
                const double theta = sl.c - r.zeta, xi = x - r.zeta;
                const double At = s_.bar->Atilde(theta), Bt = s_.bar->Btilde(theta);
                const double q2 = P.lambda() / P.alpha() * xi * xi +
                                  P.lambda() / (P.alpha() * P.alpha());
                return At * std::exp(xi * P.s2a) + Bt * std::exp(-xi * P.s2a) + q2 + r.zeta;
            }
        }
        return 0.0;
    }

    double dx(double x, const Slice& sl) const {
        const double ax = std::abs(x);
        const double sgn = (x < 0.0) ? -1.0 : 1.0;  // odd extension of d/dx
        return sgn * dx_pos(ax, sl);
    }

    double dx_pos(double x, const Slice& sl) const {
        const Problem& P = s_.prob;
        if (sl.c <= 0.0) return s_.v0.deriv(x);
        if (sl.high_cost) {
            const double edge = P.cst.x_half_delta;
            if (x <= edge) return 2.0 * P.delta() * x;
            if (x < edge + sl.c) return 1.0;
            return 2.0 * P.delta() * (x - sl.c);
        }
        const RegionInfo r = classify(x, sl);
        const double s = P.s2a;
        switch (r.tag) {
            case Region::I:
                return 2.0 * P.delta() * x;
            case Region::II:
                return s * (sl.A * std::exp(x * s) - sl.B * std::exp(-x * s)) +
                       2.0 * P.lambda() / P.alpha() * x;
            case Region::III:
                return s * (sl.At * std::exp(x * s) - sl.Bt * std::exp(-x * s)) +
                       2.0 * P.lambda() / P.alpha() * x;
            case Region::IVc:
                return s_.v0.deriv(x - sl.c);
            case Region::IVa: {
                const double theta = sl.c - r.zeta, xi = x - r.zeta;
                const Slice land = slice(theta);
                return s * (land.A * std::exp(xi * s) - land.B * std::exp(-xi * s)) +
                       2.0 * P.lambda() / P.alpha() * xi;
            }
            case Region::IVb: {
                const double theta = sl.c - r.zeta, xi = x - r.zeta;
                const double At = s_.bar->Atilde(theta), Bt = s_.bar->Btilde(theta);
                return s * (At * std::exp(xi * s) - Bt * std::exp(-xi * s)) +
                       2.0 * P.lambda() / P.alpha() * xi;
            }
        }
        return 0.0;
    }

    double dc(double x, const Slice& sl) const {
        x = std::abs(x);
        const Problem& P = s_.prob;
        if (sl.c <= 0.0) return 0.0;
        if (sl.high_cost) {
            const double edge = P.cst.x_half_delta;
            if (x >= edge + sl.c) return 1.0 - 2.0 * P.delta() * (x - sl.c);
            return 0.0;
        }
        const RegionInfo r = classify(x, sl);
        const double s = P.s2a;
        switch (r.tag) {
            case Region::I:
                return 0.0;
            case Region::II:
                // via U: Qc = U - Qx with U = 2 l x / a + C e^{xs} + D e^{-xs}
                return (2.0 * P.lambda() / P.alpha() * x + sl.C * std::exp(x * s) +
                        sl.D * std::exp(-x * s)) -
                       dx_pos(x, sl);
            case Region::III:
                return (2.0 * P.lambda() / P.alpha() * x + sl.Ct * std::exp(x * s) +
                        sl.Dt * std::exp(-x * s)) -
                       dx_pos(x, sl);
            case Region::IVc:
                return 1.0 - s_.v0.deriv(x - sl.c);
            case Region::IVa:
            case Region::IVb:
                return 1.0 - dx_pos(x, sl);  // U = 1 in the acting region
        }
        return 0.0;
    }

    double dxx(double x, const Slice& sl) const {
        x = std::abs(x);
        const Problem& P = s_.prob;
        if (sl.c <= 0.0) return s_.v0.second(x);
        if (sl.high_cost) {
            const double edge = P.cst.x_half_delta;
            if (x <= edge) return 2.0 * P.delta();
            if (x < edge + sl.c) return 0.0;
            return 2.0 * P.delta();
        }
        const RegionInfo r = classify(x, sl);
        const double a = P.alpha();
        switch (r.tag) {
            case Region::I:
                return 2.0 * P.delta();
            case Region::II:
                return 2.0 * a * (sl.A * std::exp(x * P.s2a) + sl.B * std::exp(-x * P.s2a)) +
                       2.0 * P.lambda() / a;
            case Region::III:
                return 2.0 * a * (sl.At * std::exp(x * P.s2a) + sl.Bt * std::exp(-x * P.s2a)) +
                       2.0 * P.lambda() / a;
            case Region::IVc:
                return s_.v0.second(x - sl.c);
            case Region::IVa: {
                const double theta = sl.c - r.zeta, xi = x - r.zeta;
                const Slice land = slice(theta);
                return 2.0 * a * (land.A * std::exp(xi * P.s2a) + land.B * std::exp(-xi * P.s2a)) +
                       2.0 * P.lambda() / a;
            }
            case Region::IVb: {
                const double theta = sl.c - r.zeta, xi = x - r.zeta;
                const double At = s_.bar->Atilde(theta), Bt = s_.bar->Btilde(theta);
                return 2.0 * a * (At * std::exp(xi * P.s2a) + Bt * std::exp(-xi * P.s2a)) +
                       2.0 * P.lambda() / a;
            }
        }
        return 0.0;
    }

    Solution s_;
};

}  // namespace fuelctrl
