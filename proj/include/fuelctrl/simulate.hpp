#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <thread>
#include <vector>

#include "fuelctrl/valuefn.hpp"

namespace fuelctrl {

/// Counter-based stream: one splitmix64 sequence per (seed, path) key, so the
/// draw sequence of a path is independent of scheduling.
class PathRng {
  public:
    PathRng(uint64_t seed, uint64_t path) {
        state_ = mix(seed ^ (0x9e3779b97f4a7c15ULL * (path + 1)));
    }
    double uniform() {
        state_ += 0x9e3779b97f4a7c15ULL;
        uint64_t z = mix(state_);
        return (z >> 11) * 0x1.0p-53;
    }
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = 0.0;
        do {
            u1 = uniform();
        } while (u1 <= 0.0);
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * M_PI * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

  private:
    static uint64_t mix(uint64_t z) {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }
    uint64_t state_ = 0;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

struct SimConfig {
    double dt = 1e-4;
    double horizon = 0.0;  ///< 0: ln(1e6)/alpha, so e^{-aT} < 1e-6
    long paths = 100000;
    uint64_t seed = 20240613;
    int threads = 0;  ///< 0: hardware, capped by FUELCTRL_THREADS
    bool record_events = false;
};

struct PathEvent {
    double t = 0.0;
    char type = '?';  // 'j' jump, 'r' reflection, 's' stop, 'T' truncation
    double size = 0.0;
};

struct PathSample {
    double cost = 0.0;
    double bias = 0.0;  // truncation allowance added to the cost
    double terminal_x = 0.0, terminal_c = 0.0;
    double stop_time = 0.0;
    double spent = 0.0;
    long jumps_to_G = 0, jumps_to_Gbar = 0, full_expenditures = 0, reflections = 0;
    bool stopped = false, truncated = false;
    std::vector<PathEvent> events;
};

namespace detail {

// diagonal shift onto a reflecting boundary: smallest u >= 0 with
// B(c - u) = x - u, Newton with bisection safeguard on monotone phi
template <class BFun, class BSlope>
inline double shift_root(double x, double c, double u_hi, BFun&& bval, BSlope&& bslope) {
    auto phi = [&](double u) { return bval(c - u) - (x - u); };
    double lo = 0.0, hi = u_hi;
    double u = std::min(u_hi, (x - bval(c)) / std::max(1.0 - bslope(c), 1e-3));
    u = std::max(u, 0.0);
    for (int it = 0; it < 60; ++it) {
        const double f = phi(u);
        if (f > 0)
            hi = u;
        else
            lo = u;
        const double d = 1.0 - bslope(c - u);
        double un = u - f / (d > 1e-9 ? d : 1.0);
        if (!(un > lo) || !(un < hi)) un = 0.5 * (lo + hi);
        if (std::abs(un - u) < 1e-13 * (1.0 + std::abs(u))) return un;
        u = un;
    }
    return u;
}

}  // namespace detail

/// One controlled path under the candidate-optimal strategy: stop in the
/// stopping region, diffuse in the waiting regions, and in the acting region
/// spend the displacement that puts the state on the nearest reflecting
/// boundary along (-1,-1), or all fuel when none is reachable.
inline PathSample simulate_path(double x0, double c0, const PiecewiseValue& pv,
                                const SimConfig& cfg, uint64_t path_index) {
    const Solution& S = pv.solution();
    const Problem& P = pv.problem();
    PathRng rng(cfg.seed, path_index);
    PathSample out;
    const double T = cfg.horizon > 0.0 ? cfg.horizon : std::log(1e6) / P.alpha();
    const double sdt = std::sqrt(cfg.dt);
    double x = std::abs(x0), c = c0, t = 0.0;
    const FGSolution* fg = S.fg.get();
    const BarSolution* bar = S.bar.get();
    auto record = [&](char type, double size) {
        if (cfg.record_events) out.events.push_back({t, type, size});
    };
    auto spend = [&](double z, char type) {
        out.cost += std::exp(-P.alpha() * t) * z;
        out.spent += z;
        x -= z;
        c -= z;
        if (c < 1e-15) c = 0.0;
        record(type, z);
    };

    const double stop_edge =
        S.v0.stop_everywhere ? std::numeric_limits<double>::infinity() : P.f0();
    long guard = 0;
    // reflection iterations do not advance time, so allow slack over T/dt
    const long guard_cap = 4 * static_cast<long>(T / cfg.dt) + 64;
    bool guard_break = false;
    while (true) {
        if (++guard > guard_cap) {
            guard_break = true;
            break;
        }
        if (c <= 0.0) {
            if (x <= stop_edge) {
                out.cost += std::exp(-P.alpha() * t) * P.delta() * x * x;
                out.stopped = true;
                record('s', x);
                break;
            }
        } else if (!fg) {
            // high-cost regime: vertical absorbing boundary at 1/(2 delta)
            const double edge = P.cst.x_half_delta;
            if (x <= edge) {
                out.cost += std::exp(-P.alpha() * t) * P.delta() * x * x;
                out.stopped = true;
                record('s', x);
                break;
            }
            spend(std::min(x - edge, c), 'j');
            continue;
        } else {
            const double F = fg->F_interp(c);
            if (x <= F) {
                out.cost += std::exp(-P.alpha() * t) * P.delta() * x * x;
                out.stopped = true;
                record('s', x);
                break;
            }
            const double G = fg->G_interp(c);
            const double btol = 1e-12 * (1.0 + x);
            const bool in_lambda_band =
                bar && c < bar->c_I && x > bar->Fbar(c) && x <= bar->Gbar_fast(c) + btol;
            if (x > G + btol && !in_lambda_band) {
                // acting region: diagonal shift
                double best = c;
                char kind = 'f';
                if (c > fg->c_bar) {
                    const double lim = fg->G_at_cbar + (c - fg->c_bar);
                    if (x < lim) {
                        const double u = detail::shift_root(
                            x, c, c - fg->c_bar, [&](double cc) { return fg->G_interp(cc); },
                            [&](double cc) {
                                return fg->g_large.empty() ? 0.5 : fg->g_large.deriv(cc);
                            });
                        if (u < best) {
                            best = u;
                            kind = 'G';
                        }
                    }
                }
                if (bar) {
                    auto u = bar->zeta_to_gbar(x, c);
                    if (u && *u < best) {
                        best = *u;
                        kind = 'B';
                    }
                }
                if (best >= c) {
                    spend(c, 'j');
                    ++out.full_expenditures;
                } else {
                    spend(best, best < 3.0 * sdt ? 'r' : 'j');
                    ++out.reflections;
                    if (kind == 'G')
                        ++out.jumps_to_G;
                    else
                        ++out.jumps_to_Gbar;
                }
                continue;
            }
        }
        if (t >= T) {
            // truncate: stop now, book the value as bias allowance
            const double tail = std::exp(-P.alpha() * t) * P.delta() * x * x;
            out.cost += tail;
            out.bias += tail;
            out.truncated = true;
            record('T', x);
            break;
        }
        // waiting: one Euler step
        out.cost += std::exp(-P.alpha() * t) * P.lambda() * x * x * cfg.dt;
        x += sdt * rng.normal();
        t += cfg.dt;
        if (x < 0.0) x = -x;  // even extension
    }
    if (guard_break && !out.truncated && !out.stopped) {
        const double tail = std::exp(-P.alpha() * t) * P.delta() * x * x;
        out.cost += tail;
        out.bias += tail;
        out.truncated = true;
    }
    out.terminal_x = x;
    out.terminal_c = c;
    out.stop_time = t;
    return out;
}

struct McResult {
    double mean = 0.0;
    double stderr_ = 0.0;
    double bias_budget = 0.0;
    long n = 0;
    double dt = 0.0;
    long truncated = 0;
    long jumps_to_Gbar = 0, jumps_to_G = 0, full_expenditures = 0;
};

inline int resolve_threads(int requested) {
    int n = requested > 0 ? requested : static_cast<int>(std::thread::hardware_concurrency());
    if (n <= 0) n = 1;
    if (const char* env = std::getenv("FUELCTRL_THREADS")) {
        const int cap = std::atoi(env);
        if (cap > 0) n = std::min(n, cap);
    }
    return n;
}

/// Sample mean and standard error over independent paths.  Chunked fixed-size
/// accumulation makes the reduction order (and hence the result) independent
/// of the number of worker threads.
inline McResult mc_estimate(double x, double c, const PiecewiseValue& pv, const SimConfig& cfg) {
    const long n = cfg.paths;
    const long chunk = 1024;
    const long nchunks = (n + chunk - 1) / chunk;
    struct Partial {
        double sum = 0.0, sumsq = 0.0, bias = 0.0;
        long trunc = 0, jG = 0, jB = 0, full = 0;
    };
    std::vector<Partial> parts(static_cast<size_t>(nchunks));
    std::atomic<long> next{0};
    auto worker = [&]() {
        for (;;) {
            const long k = next.fetch_add(1);
            if (k >= nchunks) return;
            Partial p;
            const long lo = k * chunk, hi = std::min(n, lo + chunk);
            for (long i = lo; i < hi; ++i) {
                PathSample s = simulate_path(x, c, pv, cfg, static_cast<uint64_t>(i));
                p.sum += s.cost;
                p.sumsq += s.cost * s.cost;
                p.bias += s.bias;
                p.trunc += s.truncated ? 1 : 0;
                p.jG += s.jumps_to_G;
                p.jB += s.jumps_to_Gbar;
                p.full += s.full_expenditures;
            }
            parts[static_cast<size_t>(k)] = p;
        }
    };
    const int nt = resolve_threads(cfg.threads);
    {
        std::vector<std::thread> pool;
        pool.reserve(nt);
        for (int i = 0; i < nt; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    double sum = 0.0, sumsq = 0.0, bias = 0.0;
    McResult r;
    for (const auto& p : parts) {
        sum += p.sum;
        sumsq += p.sumsq;
        bias += p.bias;
        r.truncated += p.trunc;
        r.jumps_to_G += p.jG;
        r.jumps_to_Gbar += p.jB;
        r.full_expenditures += p.full;
    }
    r.n = n;
    r.dt = cfg.dt;
    r.mean = sum / n;
    const double var = std::max(0.0, sumsq / n - r.mean * r.mean);
    r.stderr_ = std::sqrt(var / n);
    r.bias_budget = bias / n;
    return r;
}

}  // namespace fuelctrl
