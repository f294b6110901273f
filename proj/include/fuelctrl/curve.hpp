#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

namespace fuelctrl {

/// Sampled scalar function t -> v with exact derivatives at the samples;
/// evaluation by cubic Hermite on each cell (C^1, fourth-order accurate).
class Curve {
  public:
    void add(double t, double v, double dv) {
        if (!ts_.empty() && t <= ts_.back()) {
            if (t == ts_.back()) return;  // duplicate sample
            throw std::logic_error("Curve: samples must be strictly increasing");
        }
        ts_.push_back(t);
        vs_.push_back(v);
        ds_.push_back(dv);
    }
    bool empty() const { return ts_.empty(); }
    size_t size() const { return ts_.size(); }
    double t_min() const { return ts_.front(); }
    double t_max() const { return ts_.back(); }
    const std::vector<double>& knots() const { return ts_; }
    const std::vector<double>& values() const { return vs_; }
    const std::vector<double>& derivs() const { return ds_; }

    double value(double t) const { return eval(t).first; }
    double deriv(double t) const { return eval(t).second; }

    std::pair<double, double> eval(double t) const {
        if (ts_.empty()) throw std::runtime_error("Curve: empty");
        if (t <= ts_.front()) {
            const double dt = t - ts_.front();
            return {vs_.front() + dt * ds_.front(), ds_.front()};
        }
        if (t >= ts_.back()) {
            const double dt = t - ts_.back();
            return {vs_.back() + dt * ds_.back(), ds_.back()};
        }
        const size_t i = static_cast<size_t>(
            std::upper_bound(ts_.begin(), ts_.end(), t) - ts_.begin() - 1);
        const double h = ts_[i + 1] - ts_[i];
        const double s = (t - ts_[i]) / h;
        const double v0 = vs_[i], v1 = vs_[i + 1], d0 = ds_[i] * h, d1 = ds_[i + 1] * h;
        const double s2 = s * s, s3 = s2 * s;
        const double v = (2 * s3 - 3 * s2 + 1) * v0 + (s3 - 2 * s2 + s) * d0 +
                         (-2 * s3 + 3 * s2) * v1 + (s3 - s2) * d1;
        const double dv =
            ((6 * s2 - 6 * s) * v0 + (3 * s2 - 4 * s + 1) * d0 + (-6 * s2 + 6 * s) * v1 +
             (3 * s2 - 2 * s) * d1) /
            h;
        return {v, dv};
    }

  private:
    std::vector<double> ts_, vs_, ds_;
};

namespace detail {

/// Adaptive RK45 (Cash-Karp) for a scalar ODE v' = f(t, v), storing every
/// accepted step in a Curve.  An optional event g(t, v) terminates the
/// integration at its first upward zero crossing, located by bisection on
/// the stored Hermite interpolant.
struct OdeResult {
    Curve curve;
    bool event_hit = false;
    double t_event = 0.0;
    double v_event = 0.0;
};

inline OdeResult integrate_scalar(const std::function<double(double, double)>& f, double t0,
                                  double v0, double t_end,
                                  const std::function<double(double, double)>& event = nullptr,
                                  double rtol = 1e-9, double atol = 1e-12,
                                  double max_step = 0.0) {
    static constexpr double a2 = 1.0 / 5, a3 = 3.0 / 10, a4 = 3.0 / 5, a5 = 1.0, a6 = 7.0 / 8;
    static constexpr double b21 = 1.0 / 5;
    static constexpr double b31 = 3.0 / 40, b32 = 9.0 / 40;
    static constexpr double b41 = 3.0 / 10, b42 = -9.0 / 10, b43 = 6.0 / 5;
    static constexpr double b51 = -11.0 / 54, b52 = 5.0 / 2, b53 = -70.0 / 27, b54 = 35.0 / 27;
    static constexpr double b61 = 1631.0 / 55296, b62 = 175.0 / 512, b63 = 575.0 / 13824,
                            b64 = 44275.0 / 110592, b65 = 253.0 / 4096;
    static constexpr double c1 = 37.0 / 378, c3 = 250.0 / 621, c4 = 125.0 / 594,
                            c6 = 512.0 / 1771;
    static constexpr double d1 = 2825.0 / 27648, d3 = 18575.0 / 48384, d4 = 13525.0 / 55296,
                            d5 = 277.0 / 14336, d6 = 1.0 / 4;

    OdeResult out;
    double t = t0, v = v0;
    double fv = f(t, v);
    out.curve.add(t, v, fv);
    const double span = t_end - t0;
    if (max_step <= 0.0) max_step = span / 50.0;
    double h = std::min(max_step, span / 100.0);
    double ev_prev = event ? event(t, v) : -1.0;
    int rejects = 0;
    while (t < t_end) {
        h = std::min(h, t_end - t);
        const double k1 = fv;
        const double k2 = f(t + a2 * h, v + h * b21 * k1);
        const double k3 = f(t + a3 * h, v + h * (b31 * k1 + b32 * k2));
        const double k4 = f(t + a4 * h, v + h * (b41 * k1 + b42 * k2 + b43 * k3));
        const double k5 = f(t + a5 * h, v + h * (b51 * k1 + b52 * k2 + b53 * k3 + b54 * k4));
        const double k6 =
            f(t + a6 * h, v + h * (b61 * k1 + b62 * k2 + b63 * k3 + b64 * k4 + b65 * k5));
        const double v5 = v + h * (c1 * k1 + c3 * k3 + c4 * k4 + c6 * k6);
        const double v4 = v + h * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6);
        const double err = std::abs(v5 - v4);
        const double tol = atol + rtol * std::max(std::abs(v), std::abs(v5));
        if (err > tol && h > 1e-14 * std::max(1.0, std::abs(t))) {
            h *= std::max(0.2, 0.9 * std::pow(tol / err, 0.25));
            if (++rejects > 200) throw std::runtime_error("integrate_scalar: step failure");
            continue;
        }
        rejects = 0;
        t += h;
        v = v5;
        fv = f(t, v);
        out.curve.add(t, v, fv);
        if (err > 0.0) h = std::min(max_step, h * std::min(5.0, 0.9 * std::pow(tol / err, 0.2)));
        if (event) {
            const double ev = event(t, v);
            if (ev_prev < 0.0 && ev >= 0.0) {
                double lo = out.curve.knots()[out.curve.size() - 2], hi = t;
                for (int i = 0; i < 200 && hi - lo > 1e-13 * std::max(1.0, hi); ++i) {
                    const double mid = 0.5 * (lo + hi);
                    if (event(mid, out.curve.value(mid)) >= 0.0)
                        hi = mid;
                    else
                        lo = mid;
                }
                out.event_hit = true;
                out.t_event = hi;
                out.v_event = out.curve.value(hi);
                return out;
            }
            ev_prev = ev;
        }
    }
    return out;
}

}  // namespace detail
}  // namespace fuelctrl
