// Command-line front end: regime constants, boundary curves, value surfaces,
// the verification battery, the grid-DP oracle, Monte Carlo runs and
// phase-diagram export.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "fuelctrl/fuelctrl.hpp"

namespace {

using namespace fuelctrl;

struct CommonOpts {
    double lambda = 0.7, alpha = 1.0, delta = 1.0;
    std::string config, out, format = "csv";
    double dx = 0.01, dt = 1e-4, tol = 1e-6;
    long paths = 100000;
    uint64_t seed = 20240613;
    double cmax = 0.0, xmax = 0.0;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--lambda", o.lambda, "running-cost coefficient");
    cmd->add_option("--alpha", o.alpha, "discount rate");
    cmd->add_option("--delta", o.delta, "terminal-cost coefficient");
    cmd->add_option("--config", o.config, "JSON file with {lambda, alpha, delta}");
    cmd->add_option("--out", o.out, "output path (default: stdout)");
    cmd->add_option("--format", o.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    cmd->add_option("--dx", o.dx, "grid step");
    cmd->add_option("--dt", o.dt, "simulation time step");
    cmd->add_option("--paths", o.paths, "Monte Carlo paths");
    cmd->add_option("--seed", o.seed, "RNG seed");
    cmd->add_option("--cmax", o.cmax, "fuel range (0: 3 c_bar)");
    cmd->add_option("--xmax", o.xmax, "position range (0: auto)");
    cmd->add_option("--tol", o.tol, "verification tolerance");
}

ProblemParams params_of(const CommonOpts& o) {
    ProblemParams p{o.lambda, o.alpha, o.delta};
    if (!o.config.empty()) {
        std::ifstream f(o.config);
        if (!f) throw std::runtime_error("cannot open config " + o.config);
        nlohmann::json j;
        f >> j;
        j.get_to(p);
    }
    p.validate();
    return p;
}

void emit(const CommonOpts& o, const std::string& payload) {
    if (o.out.empty()) {
        std::fwrite(payload.data(), 1, payload.size(), stdout);
    } else {
        std::ofstream f(o.out, std::ios::binary);
        if (!f) throw std::runtime_error("cannot open " + o.out);
        f << payload;
    }
}

Solution solve_for(const CommonOpts& o) {
    Problem P = make_problem(params_of(o));
    Solution s = solve(P, 3.0);
    if (o.cmax > 0.0 && s.fg && o.cmax > s.fg->c_max) {
        FGSolution fg = *s.fg;
        extend_FG_large(fg, o.cmax);
        s.fg = std::make_shared<FGSolution>(std::move(fg));
        s.levels = fuel_levels(P, *s.fg, s.bar.get());
    }
    return s;
}

int cmd_regimes(const CommonOpts& o) {
    Problem P = make_problem(params_of(o));
    emit(o, constants_json(P).dump(2) + "\n");
    return 0;
}

int cmd_boundaries(const CommonOpts& o) {
    emit(o, boundaries_csv(solve_for(o)));
    return 0;
}

int cmd_phase_diagram(const CommonOpts& o) {
    Solution s = solve_for(o);
    PiecewiseValue pv(s);
    const double c_max = s.fg ? s.fg->c_max * 0.98 : (o.cmax > 0 ? o.cmax : 2.0);
    const double x_max =
        o.xmax > 0 ? o.xmax : (s.fg ? s.prob.cst.x_half_lambda + c_max + 2.0 : 2.0 + c_max);
    CsvWriter w({"x", "c", "region"});
    const int nc = std::max(4, static_cast<int>(c_max / o.dx));
    const int nx = std::max(4, static_cast<int>(x_max / o.dx));
    for (int j = 1; j <= nc; ++j) {
        const double c = c_max * j / nc;
        auto sl = pv.slice(c);
        for (int i = 0; i <= nx; ++i) {
            const double x = x_max * i / nx;
            w.cell(x);
            w.cell(c);
            w.cell(region_name(pv.classify(x, sl).tag));
            w.end_row();
        }
    }
    std::string payload = w.str();
    if (o.format == "json") {
        nlohmann::json j;
        j["levels"] = fuel_levels_json(s.levels);
        j["constants"] = constants_json(s.prob);
        payload = j.dump(2) + "\n";
    }
    emit(o, payload);
    return 0;
}

int cmd_value(const CommonOpts& o) {
    Solution s = solve_for(o);
    PiecewiseValue pv(s);
    const double c_max = o.cmax > 0 ? o.cmax : (s.fg ? 0.98 * s.fg->c_max : 2.0);
    const double x_max = o.xmax > 0 ? o.xmax : s.prob.cst.x_half_lambda + c_max + 2.0;
    const int nx = std::max(4, static_cast<int>(x_max / o.dx));
    const int nc = std::max(4, static_cast<int>(c_max / o.dx));
    emit(o, value_csv(pv, x_max, c_max, nx, nc));
    return 0;
}

int cmd_verify(const CommonOpts& o) {
    Solution s = solve_for(o);
    PiecewiseValue pv(s);
    auto var = check_variational(pv, 400, 200, o.xmax, o.cmax > 0 ? o.cmax : 0.0, o.tol);
    auto sf = check_smooth_fit(pv, 60, o.tol);
    auto st = check_structure(pv);
    nlohmann::json j;
    j["variational"] = report_json(var, "variational");
    j["smooth_fit"] = report_json(sf, "smooth_fit");
    j["structure"] = report_json(st, "structure");
    const bool ok = var.all_pass() && sf.all_pass() && st.all_pass();
    j["pass"] = ok;
    emit(o, j.dump(2) + "\n");
    return ok ? 0 : 1;
}

int cmd_oracle(const CommonOpts& o) {
    Solution s = solve_for(o);
    PiecewiseValue pv(s);
    GridConfig gc;
    gc.dx = o.dx;
    gc.c_max = o.cmax > 0 ? o.cmax : (s.fg ? 1.2 * s.fg->c_bar : 1.0);
    if (s.fg && gc.c_max > s.fg->c_max) gc.c_max = s.fg->c_max * 0.98;
    gc.x_max = o.xmax;
    GridSolution g = solve_dp(s.prob, gc);
    double worst = 0.0, wx = 0, wc = 0;
    for (int j = 0; j <= g.nc; ++j) {
        const double c = g.c_of(j);
        auto sl = pv.slice(std::max(c, 1e-12));
        for (int i = 0; i <= g.nx; ++i) {
            const double x = g.x_of(i);
            const double q = c == 0.0 ? s.v0.value(x) : pv.value(x, sl);
            const double gap = std::abs(g.at(j, i) - q) / (1.0 + std::abs(q));
            if (gap > worst) {
                worst = gap;
                wx = x;
                wc = c;
            }
        }
    }
    nlohmann::json j{{"dx", g.dx},
                     {"x_max", g.x_max},
                     {"c_max", g.c_max},
                     {"sup_rel_gap", worst},
                     {"at_x", wx},
                     {"at_c", wc},
                     {"sweeps", g.total_sweeps}};
    if (!o.out.empty() && o.format == "csv") {
        emit(o, grid_csv(g));
        std::cerr << j.dump(2) << "\n";
    } else {
        emit(o, j.dump(2) + "\n");
    }
    return 0;
}

int cmd_simulate(const CommonOpts& o, const std::vector<double>& xs,
                 const std::vector<double>& cs) {
    Solution s = solve_for(o);
    PiecewiseValue pv(s);
    SimConfig sc;
    sc.dt = o.dt;
    sc.paths = o.paths;
    sc.seed = o.seed;
    std::vector<std::tuple<double, double, McResult>> rows;
    for (size_t i = 0; i < xs.size(); ++i) {
        const double c = i < cs.size() ? cs[i] : (cs.empty() ? 0.0 : cs.back());
        rows.emplace_back(xs[i], c, mc_estimate(xs[i], c, pv, sc));
        std::cerr << "simulate: state " << (i + 1) << "/" << xs.size() << " done\n";
    }
    emit(o, mc_csv(rows));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"finite-fuel singular control solver"};
    app.require_subcommand(1);
    CommonOpts o;
    std::vector<double> sim_x, sim_c;

    auto* regimes = app.add_subcommand("regimes", "regime constants as JSON");
    add_common(regimes, o);
    auto* boundaries = app.add_subcommand("boundaries", "moving-boundary curves as CSV");
    add_common(boundaries, o);
    auto* value = app.add_subcommand("value", "value surface on a grid");
    add_common(value, o);
    auto* verify = app.add_subcommand("verify", "run the verification battery");
    add_common(verify, o);
    auto* oracle = app.add_subcommand("oracle", "grid-DP comparison");
    add_common(oracle, o);
    auto* simulate = app.add_subcommand("simulate", "Monte Carlo at start states");
    add_common(simulate, o);
    simulate->add_option("--x", sim_x, "start positions")->required();
    simulate->add_option("--c", sim_c, "start fuel levels (broadcast from last)");
    auto* phase = app.add_subcommand("phase-diagram", "region labels on a grid");
    add_common(phase, o);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        app.exit(e);
        return 2;
    }
    try {
        if (regimes->parsed()) return cmd_regimes(o);
        if (boundaries->parsed()) return cmd_boundaries(o);
        if (value->parsed()) return cmd_value(o);
        if (verify->parsed()) return cmd_verify(o);
        if (oracle->parsed()) return cmd_oracle(o);
        if (simulate->parsed()) return cmd_simulate(o, sim_x, sim_c);
        if (phase->parsed()) return cmd_phase_diagram(o);
    } catch (const UnsupportedRegime& e) {
        std::cerr << "unsupported regime: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
