#include "run_config.hpp"

#include <fstream>
#include <set>

namespace utm::cli {

using nlohmann::json;

std::vector<double> Axis::points() const {
    if (n < 1) throw ConfigError("grid axis needs at least one point");
    if (n == 1) return {from};
    std::vector<double> p(n);
    for (int i = 0; i < n; ++i) p[i] = from + (to - from) * i / (n - 1);
    p.back() = to;
    return p;
}

namespace {

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
    if (!j.is_object()) throw ConfigError(where + ": expected an object");
    for (const auto& [k, v] : j.items())
        if (!allowed.count(k)) throw ConfigError(where + ": unknown key '" + k + "'");
}

cplx complex_value(const json& j, const std::string& where) {
    if (j.is_number()) return {j.get<double>(), 0.0};
    if (j.is_array() && j.size() == 2) return {j[0].get<double>(), j[1].get<double>()};
    throw ConfigError(where + ": expected a number or [re, im]");
}

std::vector<cplx> complex_list(const json& j, const std::string& where) {
    if (!j.is_array()) throw ConfigError(where + ": expected an array");
    std::vector<cplx> out;
    for (const auto& e : j) out.push_back(complex_value(e, where));
    return out;
}

InitialDatum parse_datum(const json& j) {
    check_keys(j, {"kind", "poly", "kappa", "center", "width"}, "q0");
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "zero") return InitialDatum::zero_datum();
    const auto poly = j.contains("poly") ? complex_list(j["poly"], "q0.poly") : std::vector<cplx>{1.0};
    if (kind == "exp_decay") return InitialDatum::exp_poly(poly, j.value("kappa", 1.0));
    if (kind == "gaussian") return InitialDatum::gaussian(poly, j.value("center", 0.0), j.value("width", 1.0));
    throw ConfigError("q0.kind must be zero, exp_decay or gaussian");
}

FracPowerSeries parse_series(const json& j, Rational alpha, const std::string& where) {
    check_keys(j, {"alpha", "coeffs", "radius"}, where);
    if (!j.contains("alpha") || !j["alpha"].is_string())
        throw ConfigError(where + ": alpha must be an exact rational string such as \"1/2\"");
    FracPowerSeries s = series_from_json(j);
    if (s.alpha() != alpha)
        throw ConfigError(where + ": alpha " + s.alpha().str() + " does not match the class step " + alpha.str());
    return s;
}

ProblemKind kind_of(const std::string& name) {
    if (name == "heat") return ProblemKind::heat;
    if (name == "ls") return ProblemKind::ls;
    if (name == "lkdv1") return ProblemKind::lkdv1;
    if (name == "lkdv2") return ProblemKind::lkdv2;
    throw ConfigError("problem must be heat, ls, lkdv1, lkdv2 or general");
}

}  // namespace

RunConfig parse_config(const json& j) {
    check_keys(j,
               {"problem", "class", "T", "U", "q0", "b", "beta", "h", "boundary_series", "tolerances", "dtn", "field",
                "grid", "fd", "verify", "output"},
               "config");
    RunConfig c;
    c.problem = j.value("problem", std::string("heat"));
    const double T = j.value("T", 1.0);
    if (!(T > 0)) throw ConfigError("T must be positive");
    InitialDatum q0 = j.contains("q0") ? parse_datum(j["q0"]) : InitialDatum::zero_datum();

    if (c.problem == "general") {
        const json& k = j.at("class");
        check_keys(k, {"n", "a", "N"}, "class");
        c.general_class = validate_class(k.at("n").get<int>(), complex_value(k.at("a"), "class.a"), k.at("N").get<int>());
        c.spec.q0 = q0;
        c.spec.T = T;
    } else {
        const ProblemKind kind = kind_of(c.problem);
        ProblemSpec probe = make_problem(kind, InitialDatum::zero_datum(), FracPowerSeries::zero(Rational(1, 2)), T);
        const Rational a = probe.alpha();
        FracPowerSeries b = j.contains("b") ? parse_series(j["b"], a, "b") : FracPowerSeries::zero(a);
        c.spec = make_problem(kind, q0, b, T);
        if (j.contains("beta")) c.spec.beta = parse_series(j["beta"], a, "beta");
        if (j.contains("h")) c.spec.h = parse_series(j["h"], a, "h");
        try {
            c.spec.validate();
        } catch (const CompatibilityError& e) {
            throw CompatibilityFailure(e.what(), c.spec.compatibility_residuals());
        }
        if (j.contains("boundary_series")) c.boundary_series = parse_series(j["boundary_series"], a, "boundary_series");
    }

    c.dtn.U = j.value("U", Defaults::U);
    c.dtn.t_lo_frac = Defaults::t_lo_frac;
    if (j.contains("dtn")) {
        const json& d = j["dtn"];
        check_keys(d, {"fit_order", "t_lo_frac", "n_fit", "abs_tol", "rel_tol"}, "dtn");
        c.dtn.fit_order = d.value("fit_order", c.dtn.fit_order);
        c.dtn.t_lo_frac = d.value("t_lo_frac", c.dtn.t_lo_frac);
        c.dtn.n_fit = d.value("n_fit", c.dtn.n_fit);
        c.dtn.quad.abs_tol = d.value("abs_tol", c.dtn.quad.abs_tol);
        c.dtn.quad.rel_tol = d.value("rel_tol", c.dtn.quad.rel_tol);
    }
    c.field.quad.abs_tol = Defaults::abs_tol;
    c.field.quad.rel_tol = Defaults::rel_tol;
    if (j.contains("tolerances")) {
        const json& t = j["tolerances"];
        check_keys(t, {"abs", "rel"}, "tolerances");
        c.field.quad.abs_tol = t.value("abs", c.field.quad.abs_tol);
        c.field.quad.rel_tol = t.value("rel", c.field.quad.rel_tol);
    }
    if (!(c.field.quad.abs_tol > 0 && c.field.quad.rel_tol >= 0)) throw ConfigError("tolerances must be positive");
    c.field.R = Defaults::R;
    c.field.x_max = Defaults::x_max;
    if (j.contains("field")) {
        const json& f = j["field"];
        check_keys(f, {"R", "tau", "x_max"}, "field");
        c.field.R = f.value("R", c.field.R);
        if (f.contains("tau") && !f["tau"].is_null()) c.field.tau = f["tau"].get<double>();
        c.field.x_max = f.value("x_max", c.field.x_max);
    }
    c.t = Axis{0, T, Defaults::grid_n};
    if (j.contains("grid")) {
        const json& g = j["grid"];
        check_keys(g, {"x", "t"}, "grid");
        auto axis = [&](const json& a, Axis def, const std::string& where) {
            check_keys(a, {"from", "to", "n"}, where);
            return Axis{a.value("from", def.from), a.value("to", def.to), a.value("n", def.n)};
        };
        if (g.contains("x")) c.x = axis(g["x"], c.x, "grid.x");
        if (g.contains("t")) c.t = axis(g["t"], c.t, "grid.t");
    }
    for (double x : c.x.points())
        if (x < 0 || x > c.field.x_max) throw ConfigError("grid.x must lie in [0, field.x_max]");
    for (double t : c.t.points())
        if (t < 0 || t > T) throw ConfigError("grid.t must lie in [0, T]");
    if (j.contains("fd")) {
        const json& f = j["fd"];
        check_keys(f, {"x_max", "nx", "nt", "theta"}, "fd");
        c.fd = FdGrid{f.value("x_max", c.fd.x_max), f.value("nx", c.fd.nx), f.value("nt", c.fd.nt),
                      f.value("theta", c.fd.theta)};
    }
    if (j.contains("verify")) {
        const json& v = j["verify"];
        check_keys(v, {"lambdas", "t", "trace_t", "deform_x"}, "verify");
        if (v.contains("lambdas")) c.gr_lambdas = complex_list(v["lambdas"], "verify.lambdas");
        if (v.contains("t")) c.gr_times = v["t"].get<std::vector<double>>();
        if (v.contains("trace_t")) c.trace_times = v["trace_t"].get<std::vector<double>>();
        c.deform_x = v.value("deform_x", c.deform_x);
    }
    for (cplx l : c.gr_lambdas)
        if (l.imag() > 0) throw ConfigError("verify.lambdas must lie in the closed lower half plane");
    if (c.gr_times.empty()) c.gr_times = {T / 4, T / 2, T};
    if (c.trace_times.empty())
        for (int k = 1; k <= Defaults::trace_points; ++k) c.trace_times.push_back(T * k / Defaults::trace_points);
    c.output = j.value("output", std::string("out"));
    return c;
}

RunConfig load_config(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw ConfigError("cannot open config " + file.string());
    json j;
    try {
        j = json::parse(in, nullptr, true, true);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    return parse_config(j);
}

json defaults_json() {
    using D = Defaults;
    return {{"U", D::U},
            {"abs_tol", D::abs_tol},
            {"rel_tol", D::rel_tol},
            {"R", D::R},
            {"tau", "T"},
            {"t_lo", "T/50"},
            {"x_max", D::x_max},
            {"grid", {{"x", {0, D::grid_x_to, D::grid_n}}, {"t", {"0", "T", D::grid_n}}}},
            {"fd", {{"x_max", D::fd_x_max}, {"nx", D::fd_nx}, {"nt", D::fd_nt}, {"theta", 0.5}}},
            {"thresholds",
             {{"gr_factor", D::gr_factor},
              {"flode_residual", D::flode_residual},
              {"deformation", D::deformation},
              {"boundary_trace", D::boundary_trace},
              {"oracle_diff", D::oracle_diff},
              {"removeqT", D::removeqT}}}};
}

json error_payload(const std::exception& e) {
    json err = {{"message", e.what()}};
    if (auto* c = dynamic_cast<const CompatibilityFailure*>(&e)) {
        err["type"] = "compatibility";
        for (std::size_t k = 0; k < c->residuals.size(); ++k)
            err["conditions"].push_back({{"k", k + 1},
                                         {"residual", {c->residuals[k].real(), c->residuals[k].imag()}},
                                         {"ok", std::abs(c->residuals[k]) <= 1e-8}});
    } else if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const nlohmann::json::exception*>(&e)) {
        err["type"] = "config";
    } else if (dynamic_cast<const ClassError*>(&e) || dynamic_cast<const UnsupportedClass*>(&e)) {
        err["type"] = "class";
    } else if (dynamic_cast<const IllConditioned*>(&e)) {
        err["type"] = "ill_conditioned";
    } else if (dynamic_cast<const std::invalid_argument*>(&e) || dynamic_cast<const std::domain_error*>(&e)) {
        err["type"] = "precondition";
    } else {
        err["type"] = "runtime";
    }
    return {{"error", err}};
}

}  // namespace utm::cli
