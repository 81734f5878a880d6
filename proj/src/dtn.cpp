#include "utm/dtn.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace utm {

using std::numbers::pi;
static const cplx I(0, 1);

namespace {

double gamma_ratio(double a, double b) { return std::exp(std::lgamma(a) - std::lgamma(b)); }

void require_alpha(const FracPowerSeries& s, Rational a, const char* what) {
    if (!(s.alpha() == a))
        throw AlphaMismatch(std::string(what) + " must have series step " + a.str() + ", got " + s.alpha().str());
}

FracPowerSeries constant_series(Rational a, cplx c) { return FracPowerSeries(a, {c}); }

// t_k = k T / steps for even k with t_k >= t_from
std::vector<double> residual_times(double T, int steps, double t_from) {
    std::vector<double> t;
    for (int k = 0; k <= steps; k += 2) {
        double tk = k * T / steps;
        if (tk >= t_from - 1e-14 * T) t.push_back(tk);
    }
    return t;
}

FracPowerSeries run_recurrence(const ProblemSpec& p, const FracPowerSeries& G, cplx y0, int U, bool lagged_index) {
    switch (p.kind) {
    case ProblemKind::heat: return heat_recurrence(p.b, G, y0, U);
    case ProblemKind::ls: return ls_recurrence(p.b, G, y0, U);
    case ProblemKind::lkdv1: return lkdv1_recurrence(p.b, G, y0, U);
    case ProblemKind::lkdv2: return lkdv2_recurrence(p.b, p.beta, G, y0, U, lagged_index);
    }
    throw std::logic_error("unknown problem kind");
}

// y_j for every j fixed by the boundary conditions
std::map<int, FracPowerSeries> boundary_values(const ProblemSpec& p, const FracPowerSeries& Y) {
    std::map<int, FracPowerSeries> y;
    y.emplace(0, Y);
    auto neg = [](const FracPowerSeries& s) { return series_scale(s, -1.0); };
    switch (p.kind) {
    case ProblemKind::heat: y.emplace(1, neg(series_mul(p.b, Y))); break;
    case ProblemKind::ls: y.emplace(1, series_add(p.h, neg(series_mul(p.b, Y)))); break;
    case ProblemKind::lkdv1: y.emplace(2, neg(series_mul(p.b, Y))); break;
    case ProblemKind::lkdv2:
        y.emplace(1, neg(series_mul(p.b, Y)));
        y.emplace(2, neg(series_mul(p.beta, Y)));
        break;
    }
    return y;
}

}  // namespace

EquationClass ProblemSpec::cls() const {
    switch (kind) {
    case ProblemKind::heat: return validate_class(2, 1.0, 1);
    case ProblemKind::ls: return validate_class(2, I, 1);
    case ProblemKind::lkdv1: return validate_class(3, -I, 1);
    case ProblemKind::lkdv2: return validate_class(3, I, 2);
    }
    throw std::logic_error("unknown problem kind");
}

Rational ProblemSpec::alpha() const {
    if (kind == ProblemKind::lkdv1) return Rational(2, 3);
    return Rational(1, cls().n);
}

std::map<std::pair<int, int>, FracPowerSeries> ProblemSpec::b_coeffs() const {
    const Rational a = alpha();
    std::map<std::pair<int, int>, FracPowerSeries> m;
    m.emplace(std::pair{1, 0}, b);
    switch (kind) {
    case ProblemKind::heat:
    case ProblemKind::ls: m.emplace(std::pair{1, 1}, constant_series(a, 1.0)); break;
    case ProblemKind::lkdv1: m.emplace(std::pair{1, 2}, constant_series(a, 1.0)); break;
    case ProblemKind::lkdv2:
        m.emplace(std::pair{1, 1}, constant_series(a, 1.0));
        m.emplace(std::pair{2, 0}, beta);
        m.emplace(std::pair{2, 2}, constant_series(a, 1.0));
        break;
    }
    return m;
}

std::vector<FracPowerSeries> ProblemSpec::h_coeffs() const {
    const Rational a = alpha();
    if (kind == ProblemKind::ls) return {h};
    if (kind == ProblemKind::lkdv2) return {FracPowerSeries::zero(a), FracPowerSeries::zero(a)};
    return {FracPowerSeries::zero(a)};
}

std::vector<cplx> ProblemSpec::compatibility_residuals() const {
    auto hk = h_coeffs();
    std::vector<cplx> r(hk.size(), 0.0);
    for (const auto& [kj, s] : b_coeffs()) {
        auto [k, j] = kj;
        cplx dj = j < int(q0.derivs.size()) ? q0.derivs[j] : cplx(0);
        if (j >= int(q0.derivs.size()) && !q0.zero)
            throw std::invalid_argument("initial datum lacks derivative " + std::to_string(j) + " at 0");
        r[k - 1] += s[0] * dj;
    }
    for (std::size_t k = 0; k < hk.size(); ++k) r[k] -= hk[k][0];
    return r;
}

void ProblemSpec::validate(double tol) const {
    const Rational a = alpha();
    require_alpha(b, a, "b");
    if (kind == ProblemKind::lkdv2) require_alpha(beta, a, "beta");
    if (kind == ProblemKind::ls) require_alpha(h, a, "h");
    if (!(T > 0)) throw std::invalid_argument("horizon T must be positive");
    auto r = compatibility_residuals();
    std::ostringstream msg;
    bool bad = false;
    for (std::size_t k = 0; k < r.size(); ++k)
        if (std::abs(r[k]) > tol) {
            msg << (bad ? "; " : "") << "compatibility condition " << k + 1 << " fails: residual " << std::abs(r[k]);
            bad = true;
        }
    if (bad) throw CompatibilityError(msg.str());
}

ProblemKind problem_kind(const EquationClass& cls) {
    const EquationClass c = validate_class(cls.n, cls.a, cls.N);
    auto near = [&](cplx a) { return std::abs(c.a - a) < 1e-12; };
    if (c.n == 2 && c.N == 1 && near(1.0)) return ProblemKind::heat;
    if (c.n == 2 && c.N == 1 && near(I)) return ProblemKind::ls;
    if (c.n == 3 && c.N == 1 && near(-I)) return ProblemKind::lkdv1;
    if (c.n == 3 && c.N == 2 && near(I)) return ProblemKind::lkdv2;
    throw UnsupportedClass("general-n system out of scope: only heat, LS, LKdV1 and LKdV2 have Frobenius solvers");
}

ProblemSpec make_problem(ProblemKind kind, InitialDatum q0, FracPowerSeries b, double T) {
    ProblemSpec p;
    p.kind = kind;
    p.q0 = std::move(q0);
    p.b = std::move(b);
    p.T = T;
    const Rational a = p.alpha();
    p.beta = FracPowerSeries::zero(a);
    p.h = FracPowerSeries::zero(a);
    return p;
}

FracPowerSeries heat_recurrence(const FracPowerSeries& B, const FracPowerSeries& G, cplx y0, int U) {
    const Rational a(1, 2);
    require_alpha(B, a, "B");
    require_alpha(G, a, "G");
    std::vector<cplx> Y(U + 1, 0.0);
    Y[0] = y0;
    for (int u = 0; u < U; ++u) {
        cplx s = G[u];
        for (int v = 0; v <= u; ++v) s += Y[v] * B[u - v];
        Y[u + 1] = gamma_ratio((u + 2) / 2.0, (u + 3) / 2.0) * s;
    }
    return FracPowerSeries(a, Y);
}

FracPowerSeries ls_recurrence(const FracPowerSeries& B, const FracPowerSeries& G, cplx y0, int U) {
    const Rational a(1, 2);
    require_alpha(B, a, "B");
    require_alpha(G, a, "G");
    const cplx si = std::sqrt(I);
    std::vector<cplx> Y(U + 1, 0.0);
    Y[0] = y0;
    for (int u = 0; u < U; ++u) {
        cplx s = G[u];
        for (int v = 0; v <= u; ++v) s += Y[v] * B[u - v];
        Y[u + 1] = si * gamma_ratio((u + 2) / 2.0, (u + 3) / 2.0) * s;
    }
    return FracPowerSeries(a, Y);
}

FracPowerSeries lkdv1_recurrence(const FracPowerSeries& B, const FracPowerSeries& G, cplx y0, int U) {
    const Rational a(2, 3);
    require_alpha(B, a, "B");
    require_alpha(G, a, "G");
    std::vector<cplx> Y(U + 1, 0.0);
    Y[0] = y0;
    for (int u = 0; u < U; ++u) {
        cplx s = G[u];
        for (int v = 0; v <= u; ++v) s -= Y[v] * B[u - v];
        Y[u + 1] = gamma_ratio((2 * u + 3) / 3.0, (2 * u + 5) / 3.0) * s;
    }
    return FracPowerSeries(a, Y);
}

FracPowerSeries lkdv2_recurrence(const FracPowerSeries& B, const FracPowerSeries& Beta, const FracPowerSeries& G,
                                 cplx y0, int U, bool lagged_index) {
    const Rational a(1, 3);
    require_alpha(B, a, "B");
    require_alpha(Beta, a, "beta");
    require_alpha(G, a, "G");
    std::vector<cplx> Y(U + 1, 0.0);
    Y[0] = y0;
    for (int u = 0; u + 2 <= U; ++u) {
        cplx s1 = 0, s2 = G[u];
        for (int v = 0; v <= u + 1; ++v) {
            int idx = lagged_index ? u - v : u + 1 - v;
            if (idx >= 0) s1 += Y[v] * B[idx];
        }
        for (int v = 0; v <= u; ++v) s2 += Y[v] * Beta[u - v];
        Y[u + 2] = gamma_ratio((u + 4) / 3.0, (u + 5) / 3.0) * s1 + gamma_ratio((u + 3) / 3.0, (u + 5) / 3.0) * s2;
    }
    return FracPowerSeries(a, Y);
}

GSamples general_flode_rhs(const EquationClass& cls, const InitialDatum& q0, int k, const std::vector<double>& t,
                           double T, const QuadratureConfig& cfg) {
    if (k < cls.N + 1 || k > cls.n)
        throw std::invalid_argument("general_flode_rhs: k must lie in N+1..n");
    auto th = enumerate_theta(cls);
    BracketSpec s;
    s.n = cls.n;
    s.thetas = {th[k - cls.N - 1]};
    s.weights = {1.0};
    const cplx e = std::polar(1.0, s.thetas[0]);
    for (int j = 0; j <= cls.n - 2; ++j) {
        cplx dj = j < int(q0.derivs.size()) ? q0.derivs[j] : cplx(0);
        s.d.push_back(c_coeff(e, j, cls) * dj);
    }
    return invert_bracket(s, q0, t, T, cfg);
}

ResidualReport flode_residual(const ProblemSpec& p, const FracPowerSeries& y, const std::function<cplx(double)>& g,
                              int steps, double t_from) {
    if (steps < 4 || steps % 4 != 0) throw std::invalid_argument("flode_residual: steps must be a multiple of 4");
    const double T = p.T, a = p.alpha().value();
    const cplx si = std::sqrt(I);
    auto op = [&](int N) {
        const double h = T / N;
        Eigen::VectorXcd ys(N + 1), bs(N + 1), betas(N + 1);
        for (int k = 0; k <= N; ++k) {
            double tk = k * h;
            ys[k] = y.eval(tk);
            bs[k] = p.b.eval(tk);
            betas[k] = p.kind == ProblemKind::lkdv2 ? p.beta.eval(tk) : cplx(0);
        }
        Eigen::VectorXcd by = bs.cwiseProduct(ys);
        switch (p.kind) {
        case ProblemKind::heat: return Eigen::VectorXcd(caputo_l1_numeric(ys, h, a) - by);
        case ProblemKind::ls: return Eigen::VectorXcd(caputo_l1_numeric(ys, h, a) - si * by);
        case ProblemKind::lkdv1: return Eigen::VectorXcd(caputo_l1_numeric(ys, h, a) + by);
        case ProblemKind::lkdv2: {
            Eigen::VectorXcd dy = caputo_l1_numeric(ys, h, a);
            return Eigen::VectorXcd(caputo_l1_numeric(dy, h, a) - caputo_l1_numeric(by, h, a) -
                                    betas.cwiseProduct(ys));
        }
        }
        throw std::logic_error("unknown problem kind");
    };
    // Richardson step on the leading h^{2 - alpha} error of the L1 scheme
    Eigen::VectorXcd fine = op(steps), coarse = op(steps / 2);
    const double w = std::pow(2.0, 2 - a);
    const cplx gfac = p.kind == ProblemKind::ls ? si : cplx(1);
    ResidualReport rep;
    rep.t_from = t_from;
    rep.t_to = T;
    for (int k = 0; k <= steps; k += 2) {
        double tk = k * T / steps;
        if (tk < t_from - 1e-14 * T) continue;
        cplx lhs = (w * fine[k] - coarse[k / 2]) / (w - 1);
        cplx r = lhs - gfac * g(tk);
        rep.t.push_back(tk);
        rep.r.push_back(r);
        rep.sup = std::max(rep.sup, std::abs(r));
    }
    return rep;
}

DtnSolution solve_dtn(const ProblemSpec& p, const DtnOptions& opt) {
    p.validate();
    const Rational a = p.alpha();
    const double T = p.T;
    const int U = opt.U;
    if (U < 1) throw std::invalid_argument("solve_dtn: U must be at least 1");
    const int Ufit = std::max(U, opt.fit_order);
    const int nfit = opt.n_fit > 0 ? opt.n_fit : std::max(3 * (Ufit + 1), 48);

    std::vector<double> tfit = chebyshev_nodes(opt.t_lo_frac * T, T, nfit);
    std::vector<double> tres = residual_times(T, opt.residual_steps, T / 10);
    std::vector<double> tall = tfit;
    tall.insert(tall.end(), tres.begin(), tres.end());

    GDatumOptions gopt;
    gopt.b0 = p.b[0];
    gopt.heat_plus_q0_sign = opt.heat_plus_q0_sign;
    if (p.kind == ProblemKind::ls) gopt.h = [h = p.h](double t) { return h.eval(t); };
    GSamples gall = g_datum(p.kind, p.q0, tall, T, opt.quad, gopt);

    DtnSolution sol;
    sol.g.t = tfit;
    sol.g.g.assign(gall.g.begin(), gall.g.begin() + nfit);
    sol.g.err.assign(gall.err.begin(), gall.err.begin() + nfit);
    sol.g.rho_max = gall.rho_max;
    sol.g.asymptotic_terms = gall.asymptotic_terms;

    FitResult fit = extract_coefficients(tfit, sol.g.g, a, Ufit, opt.fit);
    sol.G = fit.series;
    sol.fit_residual = fit.residual;
    sol.fit_cond = fit.cond;

    const cplx y0 = p.q0.derivs.empty() ? p.q0.q0(0.0) : p.q0.derivs[0];
    FracPowerSeries Y = run_recurrence(p, sol.G, y0, U, opt.lagged_lkdv2_index);

    // coefficient overflow guard
    double ref = std::abs(y0);
    if (ref == 0)
        for (std::size_t u = 0; u < sol.G.size(); ++u) ref = std::max(ref, std::abs(sol.G[u]) * std::pow(T, u * a.value()));
    int keep = U;
    if (ref > 0)
        for (int u = 1; u <= U; ++u)
            if (std::abs(Y[u]) * std::pow(T, u * a.value()) > opt.overflow_guard * ref) {
                keep = u - 1;
                break;
            }
    if (keep < U) {
        Y = Y.truncated(keep + 1);
        sol.truncated = true;
        sol.note = "coefficient growth at u = " + std::to_string(keep + 1) +
                   " exceeds the overflow guard; suspected radius of convergence below T";
    }
    sol.U = keep;
    Y.set_radius(radius_estimate(Y));
    sol.y = boundary_values(p, Y);

    std::vector<double> th;
    std::vector<cplx> gh;
    for (int i = 0; i < nfit; i += 2) {
        th.push_back(tfit[i]);
        gh.push_back(sol.g.g[i]);
    }
    std::map<int, FracPowerSeries> half;
    bool have_half = false;
    if (int(th.size()) > Ufit + 1) {
        // the refit only measures sensitivity, so its conditioning is not gated
        FitOptions fo = opt.fit;
        fo.cond_bound = INFINITY;
        try {
            half = boundary_values(p, run_recurrence(p, extract_coefficients(th, gh, a, Ufit, fo).series, y0, keep,
                                                     opt.lagged_lkdv2_index));
            have_half = true;
        } catch (const IllConditioned&) {
        }
    }
    for (const auto& [j, s] : sol.y) {
        double d = have_half ? 0 : INFINITY;
        for (int k = 0; k <= 200 && have_half; ++k) {
            const double t = T * k / 200;
            d = std::max(d, std::abs(s.eval(t) - half.at(j).eval(t)));
        }
        sol.trace_uncertainty[j] = d + std::abs(s[keep]) * std::pow(T, keep * a.value());
    }

    std::map<double, cplx> glookup;
    for (std::size_t i = 0; i < tres.size(); ++i) glookup[tres[i]] = gall.g[nfit + i];
    sol.flode_residual_report = flode_residual(p, Y, [&](double t) { return glookup.at(t); }, opt.residual_steps, T / 10);
    return sol;
}

DtnSolution dtn_from_boundary_series(const ProblemSpec& p, const FracPowerSeries& y, int U) {
    p.validate();
    const Rational a = p.alpha();
    require_alpha(y, a, "boundary series");
    if (U < 1) throw std::invalid_argument("dtn_from_boundary_series: U must be at least 1");
    FracPowerSeries G = FracPowerSeries::zero(a);
    switch (p.kind) {
    case ProblemKind::heat: G = series_add(caputo_series(y, a), series_scale(series_mul(p.b, y), -1.0)); break;
    case ProblemKind::ls:
        G = series_add(series_scale(caputo_series(y, a), 1.0 / std::sqrt(I)), series_scale(series_mul(p.b, y), -1.0));
        break;
    case ProblemKind::lkdv1: G = series_add(caputo_series(y, a), series_mul(p.b, y)); break;
    case ProblemKind::lkdv2: {
        FracPowerSeries dd = caputo_series(caputo_series(y, a), a);
        G = series_add(dd, series_scale(series_add(caputo_series(series_mul(p.b, y), a), series_mul(p.beta, y)), -1.0));
        break;
    }
    }
    // terms past the order of y are incomplete
    const std::size_t n = p.cls().n;
    G = G.truncated(y.size() > n ? y.size() - n : 1);
    DtnSolution sol;
    sol.G = G;
    FracPowerSeries Y = run_recurrence(p, G, y[0], U, false);
    sol.U = U;
    sol.y = boundary_values(p, Y);
    sol.note = "boundary series supplied; G from the FLODE operator";
    return sol;
}

DtnSolution solve_dtn(const ProblemSpec& p, int U) {
    DtnOptions o;
    o.U = U;
    return solve_dtn(p, o);
}

nlohmann::json to_json(const DtnSolution& s) {
    nlohmann::json j;
    for (const auto& [k, v] : s.y) j["y"][std::to_string(k)] = to_json(v);
    j["U"] = s.U;
    j["truncated"] = s.truncated;
    j["note"] = s.note;
    j["G"] = to_json(s.G);
    j["fit"] = {{"residual", s.fit_residual}, {"cond", s.fit_cond}, {"rho_max", s.g.rho_max}};
    for (const auto& [k, v] : s.trace_uncertainty) j["trace_uncertainty"][std::to_string(k)] = v;
    j["flode_residual"] = {{"t_from", s.flode_residual_report.t_from},
                           {"t_to", s.flode_residual_report.t_to},
                           {"sup", s.flode_residual_report.sup}};
    return j;
}

}  // namespace utm
