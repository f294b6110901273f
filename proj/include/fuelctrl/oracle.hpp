#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "fuelctrl/model.hpp"
#include "fuelctrl/oneshot.hpp"

namespace fuelctrl {

struct GridConfig {
    double dx = 0.01;
    double x_max = 0.0;  ///< 0: max(f0, a/2l) + c_max + 5/sqrt(2a)
    double c_max = 0.0;
    double tol = 1e-10;
    long max_sweeps_per_row = 400000;
    double omega = 0.0;  ///< PSOR relaxation; 0 picks it from the grid size
};

enum : uint8_t { kPolicyStop = 0, kPolicyWait = 1, kPolicyAct = 2 };

/// Markov-chain-approximation solution on the (x, c) lattice with c-step equal
/// to dx, so that acting maps lattice points to lattice points diagonally.
struct GridSolution {
    double dx = 0.0, x_max = 0.0, c_max = 0.0;
    int nx = 0, nc = 0;  // nodes are i = 0..nx, rows j = 0..nc
    std::vector<double> value;
    std::vector<uint8_t> policy;
    long total_sweeps = 0;

    double at(int j, int i) const { return value[static_cast<size_t>(j) * (nx + 1) + i]; }
    uint8_t pol(int j, int i) const { return policy[static_cast<size_t>(j) * (nx + 1) + i]; }
    double x_of(int i) const { return i * dx; }
    double c_of(int j) const { return j * dx; }

    /// Bilinear value lookup at arbitrary (x, c) inside the grid.
    double interp(double x, double c) const {
        x = std::abs(x);
        const double fi = std::min(x / dx, static_cast<double>(nx) - 1e-9);
        const double fj = std::min(c / dx, static_cast<double>(nc) - 1e-9);
        const int i = static_cast<int>(fi), j = static_cast<int>(fj);
        const double tx = fi - i, tc = fj - j;
        return (1 - tx) * (1 - tc) * at(j, i) + tx * (1 - tc) * at(j, i + 1) +
               (1 - tx) * tc * at(j + 1, i) + tx * tc * at(j + 1, i + 1);
    }
};

/// Value iteration with projected SOR sweeps in x, rows solved bottom-up in c
/// (acting references the row below, so each row is a one-dimensional
/// obstacle problem).  Implicit discounting keeps the scheme unconditionally
/// stable; the result is deterministic for a fixed sweep order.
inline GridSolution solve_dp(const Problem& P, const GridConfig& cfg) {
    if (!(cfg.dx > 0.0) || cfg.dx > 0.02001)
        throw std::invalid_argument("solve_dp: dx must be in (0, 0.02]");
    NoFuelSolution v0 = solve_V0(P);
    GridSolution g;
    g.dx = cfg.dx;
    const double base = P.lambda() < P.alpha() * P.delta()
                            ? std::max(P.f0(), P.cst.x_half_lambda)
                            : P.cst.x_half_delta;
    g.c_max = cfg.c_max;
    g.x_max = cfg.x_max > 0.0 ? cfg.x_max : base + cfg.c_max + 5.0 / P.s2a;
    g.nx = static_cast<int>(std::ceil(g.x_max / cfg.dx - 1e-9));
    g.x_max = g.nx * cfg.dx;
    g.nc = static_cast<int>(std::round(cfg.c_max / cfg.dx));
    g.value.assign(static_cast<size_t>(g.nc + 1) * (g.nx + 1), 0.0);
    g.policy.assign(g.value.size(), kPolicyWait);

    const int nx = g.nx;
    const double dt = cfg.dx * cfg.dx;
    const double disc = 1.0 + P.alpha() * dt;
    const double omega =
        cfg.omega > 0.0
            ? cfg.omega
            : std::min(1.98, 2.0 / (1.0 + std::sqrt(std::sin(M_PI / nx) * std::sin(M_PI / nx) +
                                                    2.0 * P.alpha() * dt)));

    std::vector<double> row(nx + 1), psi(nx + 1), run(nx + 1);
    std::vector<double> prev;
    for (int i = 0; i <= nx; ++i) {
        const double x = i * cfg.dx;
        run[i] = P.lambda() * x * x * dt;
    }
    for (int j = 0; j <= g.nc; ++j) {
        const double c = j * cfg.dx;
        // obstacle: stop now, or act one cell diagonally
        for (int i = 0; i <= nx; ++i) {
            const double x = i * cfg.dx;
            double ps = P.delta() * x * x;
            if (j > 0) {
                const double act = (i > 0 ? prev[i - 1] : prev[1]) + cfg.dx;
                ps = std::min(ps, act);
            }
            psi[i] = ps;
        }
        // warm start from the row below
        if (j == 0)
            row = psi;
        else
            row = prev;
        row[0] = 0.0;
        row[nx] = std::min(psi[nx], c + v0.value(g.x_max - c));
        long sweep = 0;
        double delta_sup = std::numeric_limits<double>::infinity();
        while (delta_sup > cfg.tol && sweep < cfg.max_sweeps_per_row) {
            delta_sup = 0.0;
            // forward then backward pass
            for (int i = 1; i < nx; ++i) {
                const double w = (run[i] + 0.5 * (row[i - 1] + row[i + 1])) / disc;
                const double v = std::min(psi[i], (1.0 - omega) * row[i] + omega * w);
                delta_sup = std::max(delta_sup, std::abs(v - row[i]));
                row[i] = v;
            }
            for (int i = nx - 1; i >= 1; --i) {
                const double w = (run[i] + 0.5 * (row[i - 1] + row[i + 1])) / disc;
                const double v = std::min(psi[i], (1.0 - omega) * row[i] + omega * w);
                delta_sup = std::max(delta_sup, std::abs(v - row[i]));
                row[i] = v;
            }
            ++sweep;
        }
        g.total_sweeps += sweep;
        if (delta_sup > cfg.tol)
            throw std::runtime_error("solve_dp: row failed to converge, residual " +
                                     std::to_string(delta_sup));
        double* out = &g.value[static_cast<size_t>(j) * (nx + 1)];
        uint8_t* pol = &g.policy[static_cast<size_t>(j) * (nx + 1)];
        for (int i = 0; i <= nx; ++i) {
            out[i] = row[i];
            const double x = i * cfg.dx;
            const double ptol = 1e-8 * (1.0 + std::abs(row[i]));
            if (P.delta() * x * x <= row[i] + ptol)
                pol[i] = kPolicyStop;
            else if (j > 0 && (i > 0 ? prev[i - 1] : prev[1]) + cfg.dx <= row[i] + ptol)
                pol[i] = kPolicyAct;
            else
                pol[i] = kPolicyWait;
        }
        prev = row;
    }
    return g;
}

/// Pure-stopping solver (no fuel): single row at c = 0.
inline GridSolution solve_dp_stopping(const Problem& P, double dx, double x_max) {
    NoFuelSolution v0 = solve_V0(P);
    GridSolution g;
    g.dx = dx;
    g.x_max = x_max;
    g.c_max = 0.0;
    g.nx = static_cast<int>(std::ceil(x_max / dx - 1e-9));
    g.x_max = g.nx * dx;
    g.nc = 0;
    const int nx = g.nx;
    const double dt = dx * dx;
    const double disc = 1.0 + P.alpha() * dt;
    const double omega = std::min(
        1.995, 2.0 / (1.0 + std::sqrt(std::sin(M_PI / nx) * std::sin(M_PI / nx) +
                                      2.0 * P.alpha() * dt)));
    std::vector<double> row(nx + 1), psi(nx + 1), run(nx + 1);
    for (int i = 0; i <= nx; ++i) {
        const double x = i * dx;
        psi[i] = P.delta() * x * x;
        run[i] = P.lambda() * x * x * dt;
    }
    row = psi;
    row[nx] = std::min(psi[nx], v0.value(g.x_max));
    double delta_sup = std::numeric_limits<double>::infinity();
    long sweep = 0;
    const long cap = 2000000;
    while (delta_sup > 1e-10 && sweep < cap) {
        delta_sup = 0.0;
        for (int i = 1; i < nx; ++i) {
            const double w = (run[i] + 0.5 * (row[i - 1] + row[i + 1])) / disc;
            const double v = std::min(psi[i], (1.0 - omega) * row[i] + omega * w);
            delta_sup = std::max(delta_sup, std::abs(v - row[i]));
            row[i] = v;
        }
        for (int i = nx - 1; i >= 1; --i) {
            const double w = (run[i] + 0.5 * (row[i - 1] + row[i + 1])) / disc;
            const double v = std::min(psi[i], (1.0 - omega) * row[i] + omega * w);
            delta_sup = std::max(delta_sup, std::abs(v - row[i]));
            row[i] = v;
        }
        ++sweep;
    }
    if (delta_sup > 1e-10) throw std::runtime_error("solve_dp_stopping: no convergence");
    g.total_sweeps = sweep;
    g.value = row;
    g.policy.assign(row.size(), kPolicyWait);
    for (int i = 0; i <= nx; ++i)
        if (psi[i] <= row[i] + 1e-8 * (1.0 + row[i])) g.policy[i] = kPolicyStop;
    return g;
}

/// Policy-change locations per row, labelled by order of appearance:
/// stop->wait is F, first wait->act is G, act->wait is Fbar, second
/// wait->act is Gbar.  Midpoints carry half-cell uncertainty.
struct PolicyBoundaries {
    std::vector<double> c;
    std::vector<std::array<double, 4>> edges;  // F, G, Fbar, Gbar; NaN when absent
    std::vector<int> n_switches;
    std::vector<int> ambiguous_rows;
    double uncertainty = 0.0;  // dx/2
};

inline PolicyBoundaries extract_boundaries(const GridSolution& g) {
    PolicyBoundaries pb;
    pb.uncertainty = 0.5 * g.dx;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (int j = 0; j <= g.nc; ++j) {
        std::array<double, 4> e{nan, nan, nan, nan};
        int ns = 0;
        bool ambiguous = false;
        uint8_t prev = g.pol(j, 0);
        for (int i = 1; i <= g.nx; ++i) {
            const uint8_t cur = g.pol(j, i);
            if (cur == prev) continue;
            const double mid = (i - 0.5) * g.dx;
            if (prev == kPolicyStop && cur == kPolicyWait && std::isnan(e[0]))
                e[0] = mid;
            else if (prev == kPolicyWait && cur == kPolicyAct && std::isnan(e[1]))
                e[1] = mid;
            else if (prev == kPolicyAct && cur == kPolicyWait && std::isnan(e[2]))
                e[2] = mid;
            else if (prev == kPolicyWait && cur == kPolicyAct && std::isnan(e[3]))
                e[3] = mid;
            else
                ambiguous = true;
            ++ns;
            prev = cur;
        }
        if (ns > 4) ambiguous = true;
        pb.c.push_back(g.c_of(j));
        pb.edges.push_back(e);
        pb.n_switches.push_back(ns);
        if (ambiguous) pb.ambiguous_rows.push_back(j);
    }
    return pb;
}

}  // namespace fuelctrl
