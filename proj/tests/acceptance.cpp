// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <numbers>
#include <string>

#include "oracles.hpp"
#include "utm/oracle.hpp"

using namespace utm;
using std::numbers::pi;
static const cplx I(0, 1);

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
};

void note(Outcome& o, bool ok, const char* fmt, auto... args) {
    char buf[256];
    std::snprintf(buf, sizeof buf, fmt, args...);
    if (!o.detail.empty()) o.detail += "; ";
    o.detail += buf;
    o.pass = o.pass && ok;
}

double rel(cplx got, cplx want) {
    const double s = std::abs(want);
    return s > 0 ? std::abs(got - want) / s : std::abs(got);
}

// Gamma ratio through std::lgamma, independent of utm::gamma; arguments here are positive.
double gamma_ratio(double a, double b) { return std::exp(std::lgamma(a) - std::lgamma(b)); }

FracPowerSeries monomial(Rational alpha, int u, cplx c = 1.0) {
    std::vector<cplx> v(u + 1, 0.0);
    v[u] = c;
    return FracPowerSeries(alpha, v);
}

// coefficients of sum_r c_r E_alpha(r t^alpha)
std::vector<cplx> ml_coeffs(double alpha, const std::vector<std::pair<cplx, cplx>>& roots, int len) {
    std::vector<cplx> Y(len, 0.0);
    for (int u = 0; u < len; ++u)
        for (auto [c, r] : roots) Y[u] += c * std::pow(r, u) / std::tgamma(u * alpha + 1);
    return Y;
}

// oracle coefficients below 1e-14 are cancellations of exact zeros and are compared absolutely
double coeff_err(const FracPowerSeries& got, const std::vector<cplx>& want) {
    double e = 0;
    for (std::size_t u = 0; u < want.size(); ++u)
        e = std::max(e, std::abs(want[u]) < 1e-14 ? std::abs(got[u]) : rel(got[u], want[u]));
    return e;
}

// ---------------------------------------------------------------------------------------------------------------

Outcome theta_sets() {
    Outcome o;
    auto dev = [](const std::vector<double>& a, const std::vector<double>& b) {
        if (a.size() != b.size()) return double(INFINITY);
        double d = 0;
        for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
        return d;
    };
    double d = 0;
    d = std::max(d, dev(enumerate_theta(validate_class(2, 1.0, 1)), {-pi / 2}));
    d = std::max(d, dev(enumerate_theta(validate_class(3, -I, 1)), {-pi / 6, -5 * pi / 6}));
    d = std::max(d, dev(enumerate_theta(validate_class(3, I, 2)), {-pi / 2}));
    // the stated n = 6 set belongs to a = e^{-i pi/6}; the constructive formula gives the mirrored set for e^{i pi/6}
    d = std::max(d, dev(enumerate_theta(validate_class(6, std::polar(1.0, -pi / 6), 3)),
                        {-5 * pi / 36, -17 * pi / 36, -29 * pi / 36}));
    note(o, d <= 1e-12, "stated sets max dev %.1e", d);
    const double d6 = dev(enumerate_theta(validate_class(6, std::polar(1.0, pi / 6), 3)),
                          {-7 * pi / 36, -19 * pi / 36, -31 * pi / 36});
    note(o, d6 <= 1e-12, "a = e^{i pi/6} dev %.1e", d6);

    int classes = 0, bad = 0;
    for (const auto& cls : oracle::sample_classes(12)) {
        auto th = enumerate_theta(cls);
        ++classes;
        if (int(th.size()) != cls.n - cls.N || dev(th, oracle::brute_force_theta(cls)) > 1e-12) ++bad;
    }
    note(o, bad == 0, "%d classes n <= 12, %d mismatches", classes, bad);
    return o;
}

Outcome frac_calculus() {
    Outcome o;
    double mono = 0, comp = 0;
    int cases = 0;
    for (Rational a : {Rational(1, 3), Rational(1, 2), Rational(2, 3)}) {
        const double av = a.value();
        for (int u = 1; u <= 20; ++u) {
            auto d = caputo_series(monomial(a, u), a);
            mono = std::max(mono, rel(d[u - 1], gamma_ratio(u * av + 1, (u - 1) * av + 1)));
            auto r = rl_integral_series(monomial(a, u), a);
            mono = std::max(mono, rel(r[u + 1], gamma_ratio(u * av + 1, (u + 1) * av + 1)));
            ++cases;
        }
        mono = std::max(mono, caputo_series(monomial(a, 0, 3.0), a).is_zero() ? 0.0 : 1.0);

        std::vector<cplx> c(20);
        for (int u = 0; u < 20; ++u) c[u] = cplx(std::cos(1.3 * u), std::sin(0.7 * u)) / (1.0 + u);
        FracPowerSeries y(a, c);
        auto back = caputo_series(rl_integral_series(y, a), a);
        auto twice = rl_integral_series(rl_integral_series(y, a), a), once = rl_integral_series(y, a + a);
        auto ret = rl_integral_series(caputo_series(y, a), a);
        for (int u = 0; u < 20; ++u) {
            comp = std::max(comp, rel(back[u], c[u]));
            comp = std::max(comp, rel(twice[u], once[u]));
            comp = std::max(comp, u == 0 ? std::abs(ret[0]) : rel(ret[u], c[u]));
        }
    }
    note(o, mono <= 1e-12, "%d monomial cases rel %.1e", cases, mono);
    note(o, comp <= 1e-12, "compositions rel %.1e", comp);

    for (Rational a : {Rational(1, 3), Rational(1, 2), Rational(2, 3)}) {
        const double av = a.value();
        const int u0 = int(std::ceil(2 / av));
        std::vector<cplx> c(u0 + 3, 0.0);
        c[u0] = 1;
        c[u0 + 1] = -0.5;
        c[u0 + 2] = cplx(0.25, 0.3);
        FracPowerSeries y(a, c);
        const cplx exact = caputo_series(y, a).eval(1.0);
        std::vector<double> lh, le;
        for (int m : {128, 256, 512, 1024, 2048}) {
            Eigen::VectorXcd s(m + 1);
            for (int k = 0; k <= m; ++k) s[k] = y.eval(double(k) / m);
            auto d = caputo_l1_numeric(s, 1.0 / m, av);
            lh.push_back(std::log(1.0 / m));
            le.push_back(std::log(std::abs(d[m] - exact)));
        }
        const double mh = std::accumulate(lh.begin(), lh.end(), 0.0) / lh.size();
        const double me = std::accumulate(le.begin(), le.end(), 0.0) / le.size();
        double sxy = 0, sxx = 0;
        for (std::size_t i = 0; i < lh.size(); ++i) {
            sxy += (lh[i] - mh) * (le[i] - me);
            sxx += (lh[i] - mh) * (lh[i] - mh);
        }
        const double order = sxy / sxx;
        note(o, order >= 2 - av - 0.2, "L1 order %.2f at alpha %s", order, a.str().c_str());
    }
    return o;
}

Outcome recurrences_vs_ml() {
    Outcome o;
    const int L = 12;
    const Rational h(1, 2), t3(1, 3), t23(2, 3);
    double e = 0;
    for (cplx c : {cplx(-1), cplx(0.7), cplx(-0.4, 1.3)}) {
        e = std::max(e, coeff_err(heat_recurrence(FracPowerSeries(h, {c}), FracPowerSeries::zero(h), 1.0, L - 1),
                                  ml_coeffs(0.5, {{1.0, c}}, L)));
        e = std::max(e, coeff_err(ls_recurrence(FracPowerSeries(h, {c}), FracPowerSeries::zero(h), 2.0, L - 1),
                                  ml_coeffs(0.5, {{2.0, std::sqrt(I) * c}}, L)));
        e = std::max(e, coeff_err(lkdv1_recurrence(FracPowerSeries(t23, {-c}), FracPowerSeries::zero(t23), 1.0, L - 1),
                                  ml_coeffs(2.0 / 3, {{1.0, c}}, L)));
    }
    for (auto [B0, b0] : {std::pair<cplx, cplx>{0.5, 0.75}, {-1.0, 0.3}, {cplx(0.2, 0.4), cplx(-0.6, 0.1)}}) {
        const cplx disc = std::sqrt(B0 * B0 + 4.0 * b0);
        const cplx r1 = (B0 + disc) / 2.0, r2 = (B0 - disc) / 2.0;
        auto Y = lkdv2_recurrence(FracPowerSeries(t3, {B0}), FracPowerSeries(t3, {b0}), FracPowerSeries::zero(t3), 1.0,
                                  L - 1);
        e = std::max(e, coeff_err(Y, ml_coeffs(1.0 / 3, {{-r2 / (r1 - r2), r1}, {r1 / (r1 - r2), r2}}, L)));
    }
    note(o, e <= 1e-12, "homogeneous vs Mittag-Leffler rel %.1e", e);

    // G = 1, B = 0: y = I^{n alpha} 1 (times sqrt(i) for LS)
    double r = 0;
    auto one = [](Rational a) { return FracPowerSeries(a, {1.0}); };
    r = std::max(r, rel(heat_recurrence(FracPowerSeries::zero(h), one(h), 0.0, 3)[1], 1 / std::tgamma(1.5)));
    r = std::max(r, rel(ls_recurrence(FracPowerSeries::zero(h), one(h), 0.0, 3)[1], std::sqrt(I) / std::tgamma(1.5)));
    r = std::max(r, rel(lkdv1_recurrence(FracPowerSeries::zero(t23), one(t23), 0.0, 3)[1], 1 / std::tgamma(5.0 / 3)));
    r = std::max(r, rel(lkdv2_recurrence(FracPowerSeries::zero(t3), FracPowerSeries::zero(t3), one(t3), 0.0, 4)[2],
                        1 / std::tgamma(5.0 / 3)));
    note(o, r <= 1e-12, "inhomogeneous vs RL integral rel %.1e", r);
    return o;
}

// q0 = (1 + 2x) e^{-x} with b = -1 + t^{1/2}/2 is compatible: b(0) q0(0) + q0'(0) = -1 + 1
ProblemSpec residual_fixture() {
    return make_problem(ProblemKind::heat, InitialDatum::exp_poly({1.0, 2.0}, 1.0),
                        FracPowerSeries(Rational(1, 2), {-1.0, 0.5}), 1.0);
}

Outcome flode_decay() {
    Outcome o;
    const ProblemSpec p = residual_fixture();
    std::vector<double> r;
    for (int U : {4, 8, 12, 16}) r.push_back(solve_dtn(p, U).flode_residual_report.sup);
    bool mono = true;
    for (std::size_t i = 1; i < r.size(); ++i) mono = mono && r[i] <= 1.1 * r[i - 1];
    note(o, mono, "residual on [T/10, T] for U = 4, 8, 12, 16: %.3g, %.3g, %.3g, %.3g", r[0], r[1], r[2], r[3]);
    return o;
}

FracPowerSeries exp_series(int m, cplx c, int len) {
    std::vector<cplx> Y(len, 0.0);
    cplx pw = 1;
    for (int k = 0; m * k < len; ++k) {
        Y[m * k] = pw / std::tgamma(k + 1.0);
        pw *= c;
    }
    return FracPowerSeries(Rational(1, m), Y);
}

Outcome global_relation() {
    Outcome o;
    // q = e^{-x/2 + t/4} (heat, q_x + q/2 = 0) and q = e^{-x - t} (q_t = q_xxx, q_x + q = 0, q_xx - q = 0)
    ProblemSpec heat = make_problem(ProblemKind::heat, InitialDatum::exp_poly({1.0}, 0.5),
                                    FracPowerSeries(Rational(1, 2), {0.5}), 1.0);
    ProblemSpec kdv = make_problem(ProblemKind::lkdv2, InitialDatum::exp_poly({1.0}, 1.0),
                                   FracPowerSeries(Rational(1, 3), {1.0}), 1.0);
    kdv.beta = FracPowerSeries(Rational(1, 3), {-1.0});
    FieldOptions fh, fk;
    fh.x_max = 50;
    fk.x_max = 30;
    const SolutionField hf(heat, dtn_from_boundary_series(heat, exp_series(2, 0.25, 49), 24), fh);
    const SolutionField kf(kdv, dtn_from_boundary_series(kdv, exp_series(3, -1.0, 94), 45), fk);

    const std::vector<cplx> lambdas{cplx(0.5, 0),  cplx(-1.2, 0),   cplx(2, 0),      cplx(0, -1),   cplx(0, -2),
                                    cplx(0.7, -0.3), cplx(-1.1, -0.9), cplx(1.2, -1.1), cplx(-0.4, -1.6), cplx(1.5, -0.5)};
    for (const auto* f : {&hf, &kf}) {
        double worst = 0;
        int bad = 0;
        for (cplx l : lambdas)
            for (double t : {0.25, 0.5, 1.0}) {
                GrResidual g = gr_residual(*f, l, t);
                const double ratio = std::abs(g.residual) / (g.bound + g.data_bound);
                worst = std::max(worst, ratio);
                bad += !(ratio <= 5);
            }
        note(o, bad == 0, "%s: max |r| / bound %.3g over 30 samples", f == &hf ? "heat" : "lkdv2", worst);
    }
    return o;
}

// q = e^{-x/2 + t/4}, with DtN data fitted from sampled g at fit order 12
Outcome ehrenpreis_consistency() {
    Outcome o;
    const ProblemSpec p = make_problem(ProblemKind::heat, InitialDatum::exp_poly({1.0}, 0.5),
                                       FracPowerSeries(Rational(1, 2), {0.5}), 1.0);
    auto build = [&](double scale) {
        DtnOptions d;
        d.U = 12;
        d.fit_order = 12;
        d.quad = QuadratureConfig{};
        d.quad.abs_tol *= scale;
        d.quad.rel_tol *= scale;
        FieldOptions f;
        f.quad.abs_tol *= scale;
        f.quad.rel_tol *= scale;
        return SolutionField(p, solve_dtn(p, d), f);
    };
    const SolutionField f = build(1);

    double e0 = 0;
    for (int k = 0; k <= 60; ++k) {
        const double x = 0.1 * k;
        e0 = std::max(e0, std::abs(f.evaluate(x, 0).value - p.q0.q0(x)));
    }
    note(o, e0 <= 1e-6, "t = 0 recovery on [0, 6] %.2e", e0);

    const double dev = deformation_check(f, 1.0, 0.5).deviation;
    note(o, dev <= 1e-6, "deformation at (1, T/2) %.2e", dev);

    std::vector<double> tg;
    for (int k = 1; k <= 10; ++k) tg.push_back(0.1 * k);
    const double g1 = boundary_trace_check(f, tg).gap;
    const double g2 = boundary_trace_check(build(0.1), tg).gap;
    note(o, g1 <= 1e-4 && g2 * 4 <= g1, "trace gap %.2e -> %.2e under 10x tighter tolerances (%.1fx)", g1, g2, g1 / g2);
    return o;
}

Outcome fd_oracle() {
    Outcome o;
    // q0 = (1 + 3x/2) e^{-x}, b = -(1 + t)/2: b(0) q0(0) + q0'(0) = -1/2 + 1/2
    const ProblemSpec p = make_problem(ProblemKind::heat, InitialDatum::exp_poly({1.0, 1.5}, 1.0),
                                       FracPowerSeries(Rational(1, 2), {-0.5, 0.0, -0.5}), 1.0);
    auto b = [](double t) { return cplx(-(1 + t) / 2); };
    auto h = [](double) { return cplx(0); };
    std::vector<double> xs, ts;
    for (int i = 1; i <= 20; ++i) xs.push_back(0.2 * i);
    for (int j = 1; j <= 20; ++j) ts.push_back(0.05 * j);

    auto gap = [&](int U, FdGrid grid) {
        const FdSolution fd = fd_solve_heat(p.q0, b, h, p.T, grid);
        const SolutionField f(p, solve_dtn(p, U));
        auto v = f.evaluate_grid(xs, ts);
        double diff = 0, scale = 0;
        for (std::size_t k = 0; k < v.size(); ++k) {
            const cplx ref = fd.at(xs[k / ts.size()], ts[k % ts.size()]);
            diff = std::max(diff, std::abs(v[k].value - ref));
            scale = std::max(scale, std::abs(ref));
        }
        return diff / scale;
    };
    const double coarse = gap(8, FdGrid{20, 200, 100}), fine = gap(16, FdGrid{20, 400, 200});
    note(o, fine <= 1e-2, "sup relative error %.2e at U = 16 on the 2x grid", fine);
    note(o, fine < coarse, "gap %.2e at U = 8 on the base grid", coarse);
    return o;
}

Outcome removeqT() {
    Outcome o;
    const InitialDatum phi = InitialDatum::exp_poly({1.0}, 1.0);
    double worst = 0;
    int samples = 0;
    for (const auto& cls : {validate_class(2, 1.0, 1), validate_class(2, I, 1), validate_class(3, -I, 1),
                            validate_class(3, I, 2)})
        for (double th : enumerate_theta(cls))
            for (double delta : {0.25, 1.0}) {
                worst = std::max(worst, std::abs(removeqT_check(phi, th, cls.n, delta).value));
                ++samples;
            }
    note(o, worst <= 1e-6, "max |value| %.2e over %d (theta, T - t) pairs", worst, samples);
    return o;
}

}  // namespace

int main() {
    struct Criterion {
        int id;
        const char* name;
        double limit_s;
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> all{
        {1, "theta enumeration", 1, theta_sets},
        {2, "fractional calculus identities", 10, frac_calculus},
        {3, "recurrences vs Mittag-Leffler", 1, recurrences_vs_ml},
        {4, "FLODE residual decay", 120, flode_decay},
        {5, "global relation residual", 300, global_relation},
        {6, "Ehrenpreis consistency", 300, ehrenpreis_consistency},
        {7, "end-to-end vs finite differences", 600, fd_oracle},
        {8, "removeqT numerics", 60, removeqT},
    };
    int failed = 0;
    for (const auto& c : all) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("threw: ") + e.what()};
        }
        const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const bool in_time = s <= c.limit_s;
        const bool ok = o.pass && in_time;
        failed += !ok;
        std::printf("criterion %d %s: %s (%s; %.1f s of %.0f s)\n", c.id, c.name, ok ? "PASS" : "FAIL", o.detail.c_str(), s,
                    c.limit_s);
        std::fflush(stdout);
    }
    return failed ? 1 : 0;
}
