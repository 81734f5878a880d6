#include "commands.hpp"

#include <cstdio>
#include <fstream>
#include <numbers>

namespace utm::cli {

using nlohmann::json;
using std::numbers::pi;

namespace {

std::ofstream open_out(const RunConfig& cfg, const std::string& name) {
    std::filesystem::create_directories(cfg.output);
    std::ofstream os(cfg.output / name);
    if (!os) throw std::runtime_error("cannot write " + (cfg.output / name).string());
    return os;
}

void write_json(const RunConfig& cfg, const std::string& name, const json& j) { open_out(cfg, name) << j.dump(2) << '\n'; }

void require_problem(const RunConfig& cfg, const char* cmd) {
    if (cfg.problem == "general")
        throw ConfigError(std::string(cmd) + ": general classes only produce FLODE right-hand sides (use dtn)");
}

SolutionField make_field(const RunConfig& cfg, DtnSolution d) { return SolutionField(cfg.spec, std::move(d), cfg.field); }

json cplx_json(cplx z) { return {z.real(), z.imag()}; }

json check(const std::string& name, bool pass, double measured, double threshold, json details = json::object()) {
    return {{"name", name}, {"status", pass ? "pass" : "fail"}, {"measured", measured}, {"threshold", threshold},
            {"details", std::move(details)}};
}

json skipped(const std::string& name, const std::string& why) {
    return {{"name", name}, {"status", "skipped"}, {"reason", why}};
}

}  // namespace

json cmd_theta(int n, cplx a, std::optional<int> N) {
    EquationClass cls{};
    if (N) {
        cls = validate_class(n, a, *N);
    } else {
        bool found = false;
        for (int k = 1; k < n && !found; ++k) {
            try {
                cls = validate_class(n, a, k);
                found = true;
            } catch (const ClassError&) {
            }
        }
        if (!found) throw ClassError("no well-posed boundary count for this (n, a)");
    }
    const auto th = enumerate_theta(cls);
    json j = {{"n", cls.n}, {"a", cplx_json(cls.a)}, {"N", cls.N}, {"theta", th}};
    for (double t : th) j["theta_over_pi"].push_back(t / pi);
    return j;
}

DtnSolution build_dtn(const RunConfig& cfg) {
    require_problem(cfg, "dtn");
    if (cfg.boundary_series) return dtn_from_boundary_series(cfg.spec, *cfg.boundary_series, cfg.dtn.U);
    return solve_dtn(cfg.spec, cfg.dtn);
}

json cmd_dtn(const RunConfig& cfg) {
    json out = {{"files", json::array()}};
    if (cfg.problem == "general") {
        const auto& cls = cfg.general_class;
        std::vector<double> t;
        for (double s : cfg.t.points())
            if (s > 0) t.push_back(s);
        for (int k = cls.N + 1; k <= cls.n; ++k) {
            GSamples g = general_flode_rhs(cls, cfg.spec.q0, k, t, cfg.spec.T, cfg.dtn.quad);
            const std::string name = "g_" + std::to_string(k) + ".csv";
            auto os = open_out(cfg, name);
            write_g_csv(os, g);
            out["files"].push_back(name);
        }
        return out;
    }
    DtnSolution d = build_dtn(cfg);
    write_json(cfg, "dtn.json", to_json(d));
    {
        auto os = open_out(cfg, "y.csv");
        write_series_csv(os, d.y.at(0));
    }
    out["files"] = {"dtn.json", "y.csv"};
    if (!d.g.t.empty()) {
        auto os = open_out(cfg, "g.csv");
        write_g_csv(os, d.g);
        out["files"].push_back("g.csv");
    }
    out["U"] = d.U;
    out["truncated"] = d.truncated;
    return out;
}

json cmd_solve(const RunConfig& cfg) {
    require_problem(cfg, "solve");
    SolutionField f = make_field(cfg, build_dtn(cfg));
    write_json(cfg, "dtn.json", to_json(f.dtn()));
    auto samples = field_grid(f, cfg.x.points(), cfg.t.points());
    auto os = open_out(cfg, "grid.csv");
    write_grid_csv(os, samples);
    std::size_t bad = 0;
    for (const auto& s : samples) bad += !std::isfinite(s.err);
    return {{"files", {"dtn.json", "grid.csv"}}, {"points", samples.size()}, {"unconverged", bad}};
}

json cmd_verify(const RunConfig& cfg) {
    require_problem(cfg, "verify");
    using D = Defaults;
    const double T = cfg.spec.T;
    SolutionField f = make_field(cfg, build_dtn(cfg));
    const DtnSolution& d = f.dtn();
    json checks = json::array();

    // gr_residual
    {
        bool pass = true;
        double worst = 0;
        json rows = json::array();
        for (cplx l : cfg.gr_lambdas)
            for (double t : cfg.gr_times) {
                GrResidual r = gr_residual(f, l, t);
                const double m = std::abs(r.residual), lim = D::gr_factor * (r.bound + r.data_bound);
                pass = pass && m <= lim;
                worst = std::max(worst, m / std::max(lim, 1e-300));
                rows.push_back({{"lambda", cplx_json(l)}, {"t", t}, {"residual", m}, {"bound", r.bound},
                                {"data_bound", r.data_bound}});
            }
        checks.push_back(check("gr_residual", pass, worst, 1.0, {{"measured_is", "max |residual| / (5 (bound + data_bound))"}, {"samples", rows}}));
    }
    // flode_residual
    {
        ResidualReport r = cfg.boundary_series
                               ? flode_residual(cfg.spec, d.y.at(0), [&](double t) { return d.G.eval(t); },
                                                cfg.dtn.residual_steps, T / 10)
                               : d.flode_residual_report;
        checks.push_back(check("flode_residual", r.sup <= D::flode_residual, r.sup, D::flode_residual,
                               {{"t_from", r.t_from}, {"t_to", r.t_to}}));
    }
    // deformation
    {
        DeformationReport r = deformation_check(f, cfg.deform_x, T / 2);
        checks.push_back(check("deformation", r.deviation <= D::deformation, r.deviation, D::deformation,
                               {{"x", cfg.deform_x}, {"t", T / 2}, {"bound", r.bound}}));
    }
    // boundary_trace
    {
        TraceReport r = boundary_trace_check(f, cfg.trace_times);
        checks.push_back(check("boundary_trace", r.gap <= D::boundary_trace, r.gap, D::boundary_trace,
                               {{"bound", r.bound}, {"t", r.t}}));
    }
    // oracle_diff
    if (cfg.spec.kind == ProblemKind::heat || cfg.spec.kind == ProblemKind::ls) {
        auto b = [s = cfg.spec.b](double t) { return s.eval(t); };
        auto h = [s = cfg.spec.h](double t) { return s.eval(t); };
        FdSolution fd = cfg.spec.kind == ProblemKind::heat ? fd_solve_heat(cfg.spec.q0, b, h, T, cfg.fd)
                                                           : fd_solve_ls(cfg.spec.q0, b, h, T, cfg.fd);
        std::vector<double> xs, ts;
        for (double x : cfg.x.points())
            if (x > 0 && x <= cfg.fd.x_max) xs.push_back(x);
        for (double t : cfg.t.points())
            if (t > 0) ts.push_back(t);
        auto v = f.evaluate_grid(xs, ts);
        double diff = 0, scale = 0;
        for (std::size_t i = 0; i < v.size(); ++i) {
            const cplx o = fd.at(xs[i / ts.size()], ts[i % ts.size()]);
            diff = std::max(diff, std::abs(v[i].value - o));
            scale = std::max(scale, std::abs(o));
        }
        const double rel = scale > 0 ? diff / scale : diff;
        json c = check("oracle_diff", rel <= D::oracle_diff, rel, D::oracle_diff,
                       {{"points", v.size()}, {"fd", {{"x_max", cfg.fd.x_max}, {"nx", cfg.fd.nx}, {"nt", cfg.fd.nt}}}});
        if (cfg.spec.kind == ProblemKind::ls) c["status"] = "no_claim";
        checks.push_back(c);
    } else {
        checks.push_back(skipped("oracle_diff", "no finite-difference oracle for third-order classes"));
    }
    // removeqT
    {
        const EquationClass cls = cfg.spec.cls();
        double worst = 0;
        json rows = json::array();
        for (double th : enumerate_theta(cls))
            for (double delta : {T / 4, T}) {
                RemoveqTResult r = removeqT_check(cfg.spec.q0, th, cls.n, delta, cfg.field.quad);
                worst = std::max(worst, std::abs(r.value));
                rows.push_back({{"theta", th}, {"delta", delta}, {"value", std::abs(r.value)}, {"bound", r.bound}});
            }
        checks.push_back(check("removeqT", worst <= D::removeqT, worst, D::removeqT, {{"samples", rows}}));
    }

    bool all = true;
    for (const auto& c : checks) all = all && c["status"] != "fail";
    json report = {{"schema_version", report_schema_version}, {"problem", cfg.problem}, {"T", T},
                   {"U", d.U},         {"defaults", defaults_json()},   {"checks", checks},
                   {"all_pass", all}};
    write_json(cfg, "report.json", report);
    return report;
}

json cmd_oracle(const RunConfig& cfg) {
    require_problem(cfg, "oracle");
    if (cfg.spec.kind != ProblemKind::heat && cfg.spec.kind != ProblemKind::ls)
        throw ConfigError("oracle: finite differences cover heat and ls only");
    auto b = [s = cfg.spec.b](double t) { return s.eval(t); };
    auto h = [s = cfg.spec.h](double t) { return s.eval(t); };
    FdSolution fd = cfg.spec.kind == ProblemKind::heat ? fd_solve_heat(cfg.spec.q0, b, h, cfg.spec.T, cfg.fd)
                                                       : fd_solve_ls(cfg.spec.q0, b, h, cfg.spec.T, cfg.fd);
    std::vector<double> xs;
    for (double x : cfg.x.points())
        if (x <= cfg.fd.x_max) xs.push_back(x);
    {
        auto os = open_out(cfg, "fd_grid.csv");
        write_grid_csv(os, fd.grid(xs, cfg.t.points()));
    }
    {
        auto os = open_out(cfg, "fd_trace.csv");
        os << "t,re,im\n";
        char buf[96];
        for (std::size_t i = 0; i < fd.t.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", fd.t[i], fd.y[i].real(), fd.y[i].imag());
            os << buf;
        }
    }
    return {{"files", {"fd_grid.csv", "fd_trace.csv"}}};
}

}  // namespace utm::cli
