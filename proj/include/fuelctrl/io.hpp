#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "fuelctrl/minorant.hpp"
#include "fuelctrl/model.hpp"
#include "fuelctrl/oracle.hpp"
#include "fuelctrl/simulate.hpp"
#include "fuelctrl/valuefn.hpp"
#include "fuelctrl/verify.hpp"

namespace fuelctrl {

// CSV dialect: comma separated, '.' decimal, header row, LF endings,
// 17 significant digits (lossless double round-trip).
class CsvWriter {
  public:
    explicit CsvWriter(std::vector<std::string> header) : ncol_(header.size()) {
        for (size_t i = 0; i < header.size(); ++i) {
            if (i) out_ += ',';
            out_ += header[i];
        }
        out_ += '\n';
    }
    void cell(double v) {
        sep();
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.17g", v);
        out_ += buf;
    }
    void cell(const std::string& v) {
        sep();
        out_ += v;
    }
    void cell_empty() { sep(); }
    void end_row() {
        out_ += '\n';
        col_ = 0;
    }
    const std::string& str() const { return out_; }
    void write(const std::string& path) const {
        std::ofstream f(path, std::ios::binary);
        if (!f) throw std::runtime_error("cannot open " + path);
        f << out_;
    }

  private:
    void sep() {
        if (col_) out_ += ',';
        ++col_;
    }
    std::string out_;
    size_t col_ = 0;
    size_t ncol_ = 0;
};

inline void to_json(nlohmann::json& j, const ProblemParams& p) {
    j = nlohmann::json{{"lambda", p.lambda}, {"alpha", p.alpha}, {"delta", p.delta}};
}
inline void from_json(const nlohmann::json& j, ProblemParams& p) {
    j.at("lambda").get_to(p.lambda);
    j.at("alpha").get_to(p.alpha);
    j.at("delta").get_to(p.delta);
}

inline nlohmann::json constants_json(const Problem& P) {
    const RegimeConstants& c = P.cst;
    return nlohmann::json{{"f0", c.f0},
                          {"lambda_star", c.lambda_star},
                          {"lambda_dagger", c.lambda_dagger},
                          {"K", c.K},
                          {"k", c.k},
                          {"k_bar", c.k_bar},
                          {"B0", c.B0},
                          {"x_half_delta", c.x_half_delta},
                          {"x_half_lambda", c.x_half_lambda},
                          {"regime", regime_name(c.regime)},
                          {"boundary_case", c.boundary_case},
                          {"inequality_chain", inequality_chain(P.par)}};
}

inline nlohmann::json fuel_levels_json(const FuelLevels& fl) {
    auto num = [](double v) {
        return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json("inf");
    };
    nlohmann::json j{{"c_bar", num(fl.c_bar)},     {"c_hat", num(fl.c_hat)},
                     {"c0", num(fl.c0)},           {"c_g", num(fl.c_g)},
                     {"c_I", fl.c_I},              {"c_star", num(fl.c_star)},
                     {"c_dagger", num(fl.c_dagger)}, {"c_tilde", num(fl.c_tilde)},
                     {"g0", num(fl.g0)},           {"g_delta", num(fl.g_delta)},
                     {"trichotomy_case", fl.trichotomy_case}};
    j["violations"] = fl.violations;
    return j;
}

inline nlohmann::json pieces_json(const std::vector<MinorantPiece>& pieces) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& p : pieces) {
        nlohmann::json e{{"kind", p.kind == MinorantPiece::Kind::Linear ? "linear" : "obstacle"},
                         {"y_lo", p.y_lo}};
        e["y_hi"] = std::isfinite(p.y_hi) ? nlohmann::json(p.y_hi) : nlohmann::json("inf");
        if (p.kind == MinorantPiece::Kind::Linear) {
            e["A"] = p.slope;
            e["B"] = p.icept;
        }
        arr.push_back(e);
    }
    return arr;
}

inline nlohmann::json report_json(const VerificationReport& rep, const std::string& name) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& c : rep.checks)
        arr.push_back(nlohmann::json{{"check", c.name},
                                     {"worst", c.worst},
                                     {"tol", c.tol},
                                     {"x", c.at_x},
                                     {"c", c.at_c},
                                     {"pass", c.pass}});
    return nlohmann::json{{"suite", name},
                          {"pass", rep.all_pass()},
                          {"points_checked", rep.points_checked},
                          {"growth_K0", rep.growth_K0},
                          {"growth_K1", rep.growth_K1},
                          {"checks", arr}};
}

/// Phase-diagram export: one row per fuel level with every defined boundary.
inline std::string boundaries_csv(const Solution& sol, int rows = 400) {
    CsvWriter w({"c", "F", "G", "Fbar", "Gbar", "type_F", "type_G"});
    const double c_hi = sol.fg ? sol.fg->c_max : 2.0;
    for (int i = 1; i <= rows; ++i) {
        const double c = c_hi * i / rows;
        w.cell(c);
        if (!sol.fg) {
            const double e = sol.prob.cst.x_half_delta;
            w.cell(e);
            w.cell(e);
            w.cell_empty();
            w.cell_empty();
            w.cell("absorbing");
            w.cell("absorbing");
            w.end_row();
            continue;
        }
        auto p = sol.fg->at(c);
        w.cell(p.F);
        w.cell(p.G);
        if (sol.bar && c <= sol.bar->c_I) {
            w.cell(sol.bar->Fbar(c));
            w.cell(sol.bar->Gbar(c));
        } else {
            w.cell_empty();
            w.cell_empty();
        }
        w.cell("absorbing");
        w.cell(sol.fg->G_type(c) == BoundaryType::Reflecting ? "reflecting" : "repelling");
        w.end_row();
    }
    return w.str();
}

/// Value-surface export on a rectangular grid.
inline std::string value_csv(const PiecewiseValue& pv, double x_max, double c_max, int nx,
                             int nc) {
    CsvWriter w({"x", "c", "Q", "region", "U"});
    for (int j = 1; j <= nc; ++j) {
        const double c = c_max * j / nc;
        auto sl = pv.slice(c);
        for (int i = 0; i <= nx; ++i) {
            const double x = x_max * i / nx;
            w.cell(x);
            w.cell(c);
            w.cell(pv.value(x, sl));
            w.cell(region_name(pv.classify(x, sl).tag));
            w.cell(pv.U(x, sl));
            w.end_row();
        }
    }
    return w.str();
}

/// Transformed-obstacle trace for plotting.
inline std::string obstacle_csv(const Problem& P, double c, double x_max, int n = 2000) {
    CsvWriter w({"y", "H", "dH", "d2H"});
    ScaleMap sm(P.alpha());
    for (int i = 0; i <= n; ++i) {
        const double x = x_max * i / n;
        w.cell(sm.psi(x));
        if (c > 0.0 && x > P.xc(c)) {
            w.cell(Hr(x, c, P));
            w.cell(dHr_dy(x, c, P));
            w.cell(d2Hr_dy2(x, c, P));
        } else {
            w.cell(Hl(x, P));
            w.cell(dHl_dy(x, P));
            w.cell(d2Hl_dy2(x, P));
        }
        w.end_row();
    }
    return w.str();
}

inline std::string grid_csv(const GridSolution& g) {
    CsvWriter w({"x", "c", "value", "policy"});
    static const char* names[3] = {"stop", "wait", "act"};
    for (int j = 0; j <= g.nc; ++j)
        for (int i = 0; i <= g.nx; ++i) {
            w.cell(g.x_of(i));
            w.cell(g.c_of(j));
            w.cell(g.at(j, i));
            w.cell(names[g.pol(j, i)]);
            w.end_row();
        }
    return w.str();
}

inline std::string mc_csv(const std::vector<std::tuple<double, double, McResult>>& rows) {
    CsvWriter w({"x", "c", "mean", "stderr", "n", "dt"});
    for (const auto& [x, c, r] : rows) {
        w.cell(x);
        w.cell(c);
        w.cell(r.mean);
        w.cell(r.stderr_);
        w.cell(static_cast<double>(r.n));
        w.cell(r.dt);
        w.end_row();
    }
    return w.str();
}

}  // namespace fuelctrl
