#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "utm/transforms.hpp"

using namespace utm;
using std::numbers::pi;
static const cplx I(0, 1);

// sum_u pref A_{u+n}/Gamma((u+n)/n) t^{u/n}: the g-datum read off the large-rho expansion of its bracket
static cplx g_from_asymptotics(const std::vector<cplx>& A, int n, cplx pref, double t) {
    cplx acc = 0;
    for (std::size_t m = n; m <= A.size(); ++m) acc += A[m - 1] / std::tgamma(double(m) / n) * std::pow(t, double(m) / n - 1);
    return pref * acc;
}

static std::vector<cplx> asymptotic_coeffs(const InitialDatum& d, const std::vector<double>& th,
                                           const std::vector<cplx>& w, const std::vector<cplx>& corr, int K) {
    std::vector<cplx> A(K, 0.0);
    for (int m = 1; m <= K; ++m) {
        for (std::size_t k = 0; k < th.size(); ++k) A[m - 1] += w[k] * d.derivs[m - 1] / std::pow(I * std::exp(I * th[k]), m);
        if (m - 1 < int(corr.size())) A[m - 1] -= corr[m - 1];
    }
    return A;
}

TEST_CASE("q0_hat closed forms") {
    auto e = InitialDatum::exp_poly({1.0}, 1.0);
    CHECK(std::abs(q0_hat(e, 0.0).value - 1.0) < 1e-9);
    for (cplx l : {cplx(1), cplx(-3), cplx(2, -1), cplx(0, -5), cplx(40), cplx(-7, -0.3)})
        CHECK(std::abs(q0_hat(e, l).value - 1.0 / (1.0 + I * l)) < 1e-8);

    // int_0^inf e^{-x} e^{-x^2/2} dx = e^{1/2} sqrt(pi/2) erfc(1/sqrt 2)
    auto g = InitialDatum::gaussian({1.0}, 0, std::sqrt(2.0));
    double exact = std::exp(0.5) * std::sqrt(pi / 2) * std::erfc(1 / std::sqrt(2.0));
    Estimate coarse = q0_hat(g, -I, {1e-6, 1e-4}), fine = q0_hat(g, -I, {1e-13, 1e-12});
    CHECK(std::abs(fine.value - exact) < 1e-12);
    CHECK(std::abs(coarse.value - fine.value) < 1e-6);
    CHECK(coarse.err >= std::abs(coarse.value - exact) * 0.5);
}

TEST_CASE("q0_hat rejects growth directions") {
    auto e = InitialDatum::exp_poly({1.0}, 1.0);
    CHECK_THROWS_AS(q0_hat(e, 2.0 * I), std::domain_error);
    // still convergent inside the datum's decay rate
    CHECK(std::abs(q0_hat(e, 0.5 * I).value - 2.0) < 1e-8);
    CHECK(q0_hat(InitialDatum::zero_datum(), 3.0 * I).value == cplx(0));
}

TEST_CASE("q0_hat integration-by-parts decay on rays") {
    // q0 = (1 + x/2) e^{-(x-1)^2}; q0' in closed form for the L1 norm
    auto d = InitialDatum::gaussian({1.0, 0.5}, 1.0, 1.0);
    auto dq = [](double x) { return (0.5 - 2 * (x - 1) * (1 + x / 2)) * std::exp(-(x - 1) * (x - 1)); };
    double l1 = 0;
    for (int i = 0; i < 20000; ++i) l1 += std::abs(dq((i + 0.5) * 1e-3)) * 1e-3;
    double bound_num = std::abs(d.q0(0)) + l1;
    for (double ang : {0.0, -pi / 4, -pi / 2, -3 * pi / 4, -pi})
        for (double r : {1.0, 3.0, 10.0, 50.0}) {
            cplx l = std::polar(r, ang);
            CHECK(std::abs(q0_hat(d, l).value) <= bound_num / r + 1e-9);
        }
}

TEST_CASE("builtin derivatives at zero") {
    auto e = InitialDatum::exp_poly({1.0, 2.0}, 1.0);
    for (int j = 0; j < 20; ++j) CHECK(std::abs(e.derivs[j] - std::pow(-1.0, j) * (1.0 - 2 * j)) < 1e-9 * (1 + 2 * j));
    auto g = InitialDatum::gaussian({1.0}, 0, 1);
    for (int j = 0; j < 10; ++j) {
        double ex = std::pow(-1.0, j) * std::tgamma(2 * j + 1.0) / std::tgamma(j + 1.0);
        CHECK(std::abs(g.derivs[2 * j] - ex) < 1e-10 * std::abs(ex));
        CHECK(std::abs(g.derivs[2 * j + 1]) < 1e-12);
    }
    // five-point finite differences
    for (const auto& d : {InitialDatum::gaussian({1.0, -0.3, 0.2}, 1.5, 0.8), InitialDatum::exp_poly({2.0, 1.0, 0.5}, 1.3)}) {
        const double h = 1e-2;
        auto f = d.q0;
        cplx d1 = (f(-2 * h) - 8.0 * f(-h) + 8.0 * f(h) - f(2 * h)) / (12 * h);
        cplx d2 = (-f(-2 * h) + 16.0 * f(-h) - 30.0 * f(0) + 16.0 * f(h) - f(2 * h)) / (12 * h * h);
        CHECK(std::abs(d.derivs[0] - f(0)) < 1e-14);
        CHECK(std::abs(d.derivs[1] - d1) < 1e-6);
        CHECK(std::abs(d.derivs[2] - d2) < 1e-6);
        double X = d.cutoff(1e-8);
        for (double x = X; x < X + 20; x += 0.37) CHECK(std::abs(f(x)) < 1e-10);
    }
}

TEST_CASE("f_transform closed forms") {
    auto heat = validate_class(2, 1.0, 1);
    FracPowerSeries one(Rational(1, 2), {1.0});
    const double t = 0.8;
    for (cplx l : {std::polar(0.7, 3 * pi / 4), std::polar(12.0, 3 * pi / 4), std::polar(3.0, pi / 2),
                   std::polar(25.0, 0.6 * pi), std::polar(9.0, pi / 4)}) {
        cplx mu = l * l;
        cplx exact = (std::exp(mu * t) - 1.0) / mu;
        CHECK(std::abs(f_transform(one, l, t, heat).value - exact) < 1e-12 * std::max(1.0, std::abs(exact)));
    }
    FracPowerSeries p(Rational(1, 3), {1.0, cplx(0, 2), 0.0, -1.0});
    cplx integral = 0;
    for (std::size_t u = 0; u < p.size(); ++u) integral += p[u] * std::pow(t, u / 3.0 + 1) / (u / 3.0 + 1);
    CHECK(std::abs(f_transform(p, 0.0, t, validate_class(3, I, 2)).value - integral) < 1e-13);
    CHECK(f_transform(one, 2.0 * I, 0.0, heat).value == cplx(0));
}

TEST_CASE("f_transform of t^{1/2} against a refined reference") {
    auto heat = validate_class(2, 1.0, 1);
    FracPowerSeries s(Rational(1, 2), {0.0, 1.0});
    cplx l = std::exp(I * (3 * pi / 4));
    cplx mu = l * l;
    Estimate v = f_transform(s, l, 1.0, heat);
    cplx doubled = FTransform(s, 1.0, 24).direct(mu).value;
    Estimate ref = adaptive_gk([&](double x) { return std::exp(mu * x) * std::sqrt(x); }, 0, 1, 1e-15, 1e-14, 64);
    CHECK(std::abs(v.value - doubled) < 1e-12);
    CHECK(std::abs(v.value - ref.value) < 1e-9);
}

TEST_CASE("f_transform split agrees with direct quadrature past the switchover") {
    FracPowerSeries s(Rational(1, 3), {1.0, -0.5, 0.25, cplx(0, 1), 0.1});
    for (double r : {40.0, 90.0, 250.0})
        for (double ang : {pi / 2, 0.7 * pi, pi}) {
            cplx mu = std::polar(r, ang);
            FTransform f(s, 1.0);
            FTransform fine(s, 1.0, 400);
            cplx split = f(mu).value, direct = fine.direct(mu).value;
            CHECK(std::abs(split - direct) < 1e-11);
        }
}

TEST_CASE("f_transform linearity and stability guard") {
    auto k2 = validate_class(3, I, 2);
    FracPowerSeries a(Rational(1, 3), {1.0, 2.0}), b(Rational(1, 3), {0.0, cplx(0, -1), 3.0});
    cplx l = std::polar(4.0, 2 * pi / 3 + 0.1);
    cplx lhs = f_transform(series_add(a, b), l, 0.6, k2).value;
    cplx rhs = f_transform(a, l, 0.6, k2).value + f_transform(b, l, 0.6, k2).value;
    CHECK(std::abs(lhs - rhs) < 1e-12 * std::abs(lhs));
    auto heat = validate_class(2, 1.0, 1);
    FracPowerSeries one(Rational(1, 2), {1.0});
    CHECK_THROWS_AS(f_transform(one, 1.0, 1.0, heat), std::domain_error);
    CHECK(std::abs(f_transform(one, 1.0, 1.0, heat, true).value - (std::exp(1.0) - 1.0)) < 1e-12);
    auto cb = [](double s) { return cplx(std::sqrt(s)); };
    FracPowerSeries sq(Rational(1, 2), {0.0, 1.0});
    cplx lam = std::polar(2.0, 0.7 * pi);
    CHECK(std::abs(f_transform(cb, lam, 1.0, heat, {1e-13, 1e-12}).value - f_transform(sq, lam, 1.0, heat).value) < 1e-10);
}

TEST_CASE("heat g-datum matches the closed form for q0 = e^{-x}") {
    auto d = InitialDatum::exp_poly({1.0}, 1.0);
    std::vector<double> t{0.02, 0.1, 0.3, 0.7, 1.0};
    auto g = g_datum(ProblemKind::heat, d, t, 1.0);
    for (std::size_t i = 0; i < t.size(); ++i) {
        cplx ex = -std::exp(t[i]) * std::erfc(std::sqrt(t[i]));
        CHECK(std::abs(g.g[i] - ex) < 1e-8);
        CHECK(std::abs(g.g[i] - ex) <= g.err[i] + 1e-12);
    }
}

TEST_CASE("g-datum of every class matches its series oracle") {
    std::vector<double> t{0.05, 0.2, 0.6, 1.0};
    auto d = InitialDatum::exp_poly({1.0, 0.5}, 1.2, 90);
    const cplx y0 = d.derivs[0];
    const int K = 80;
    struct Case {
        ProblemKind kind;
        int n;
        std::vector<double> th;
        std::vector<cplx> w, corr;
        cplx pref;
    };
    const double r3 = std::sqrt(3.0);
    const cplx b0 = 0.7;
    std::vector<Case> cases{
        {ProblemKind::heat, 2, {-pi / 2}, {1.0}, {y0}, 1.0},
        {ProblemKind::ls, 2, {-3 * pi / 4}, {I}, {-y0 / std::sqrt(I)}, -1.0},
        {ProblemKind::lkdv1, 3, {-pi / 6, -5 * pi / 6},
         {std::exp(I * (pi / 6)) / r3, -std::exp(I * (5 * pi / 6)) / r3}, {y0}, 1.0},
        {ProblemKind::lkdv2, 3, {-pi / 2}, {1.0}, {y0, -b0 * y0}, 1.0},
    };
    for (const auto& c : cases) {
        GDatumOptions opt;
        opt.b0 = b0;
        auto g = g_datum(c.kind, d, t, 1.0, {}, opt);
        auto A = asymptotic_coeffs(d, c.th, c.w, c.corr, K);
        // the singular terms t^{m/n - 1}, m < n, cancel
        for (int m = 1; m < c.n; ++m) CHECK(std::abs(A[m - 1]) < 1e-12);
        for (std::size_t i = 0; i < t.size(); ++i) {
            cplx ex = g_from_asymptotics(A, c.n, c.pref, t[i]);
            CHECK(std::abs(g.g[i] - ex) < 1e-8);
        }
    }
}

TEST_CASE("LS g-datum carries -h") {
    auto d = InitialDatum::exp_poly({1.0}, 1.0);
    std::vector<double> t{0.3, 0.9};
    GDatumOptions opt;
    opt.h = [](double s) { return cplx(1 + s, -s); };
    auto a = g_datum(ProblemKind::ls, d, t, 1.0);
    auto b = g_datum(ProblemKind::ls, d, t, 1.0, {}, opt);
    for (std::size_t i = 0; i < t.size(); ++i) CHECK(std::abs(b.g[i] - a.g[i] + opt.h(t[i])) < 1e-14);
}

TEST_CASE("g-datum zero data and refinement invariance") {
    std::vector<double> t{0.1, 0.5, 1.0};
    auto z = g_datum(ProblemKind::heat, InitialDatum::zero_datum(), t, 1.0);
    for (auto v : z.g) CHECK(v == cplx(0));

    // q0(0) = 0 datum: stable under rho_max doubling
    auto d = InitialDatum::exp_poly({0.0, 1.0}, 1.0);
    QuadratureConfig c1;
    c1.rho_max = 200;
    QuadratureConfig c2 = c1;
    c2.rho_max = 400;
    auto g1 = g_datum(ProblemKind::heat, d, t, 1.0, c1), g2 = g_datum(ProblemKind::heat, d, t, 1.0, c2);
    for (std::size_t i = 0; i < t.size(); ++i) CHECK(std::abs(g1.g[i] - g2.g[i]) < 1e-6);

    auto gd = InitialDatum::gaussian({1.0, 0.5}, 0, 1);
    QuadratureConfig base;
    auto g0 = g_datum(ProblemKind::lkdv2, gd, t, 1.0, base);
    QuadratureConfig ref = base;
    ref.rho_max = 2 * g0.rho_max;
    ref.panel_scale = 0.5;
    ref.R_arc = 0.1;
    auto gr = g_datum(ProblemKind::lkdv2, gd, t, 1.0, ref);
    for (std::size_t i = 0; i < t.size(); ++i) CHECK(std::abs(g0.g[i] - gr.g[i]) <= 2 * (g0.err[i] + gr.err[i]));
}

TEST_CASE("plus sign on the q0(0) term adds the 2 q0(0)/sqrt(pi t) singularity") {
    auto d = InitialDatum::exp_poly({1.0}, 1.0);
    std::vector<double> t{0.05, 0.5};
    GDatumOptions plus;
    plus.heat_plus_q0_sign = true;
    auto a = g_datum(ProblemKind::heat, d, t, 1.0), b = g_datum(ProblemKind::heat, d, t, 1.0, {}, plus);
    for (std::size_t i = 0; i < t.size(); ++i) CHECK(std::abs(b.g[i] - a.g[i] - 2 / std::sqrt(pi * t[i])) < 1e-8);
}

TEST_CASE("g-datum guards") {
    auto d = InitialDatum::exp_poly({1.0}, 1.0);
    BracketSpec bad{2, {-pi / 2}, {1.0}, {1.0, 1.0}, 1.0};
    CHECK_THROWS_AS(invert_bracket(bad, d, {0.5}, 1.0), std::domain_error);
    CHECK_THROWS_AS(g_datum(ProblemKind::heat, d, {0.0}, 1.0), std::domain_error);
    CHECK_THROWS_AS(g_datum(ProblemKind::heat, d, {1.5}, 1.0), std::domain_error);
}

TEST_CASE("g samples CSV") {
    GSamples g;
    g.t = {0.5};
    g.g = {cplx(1, -2)};
    g.err = {1e-9};
    std::ostringstream os;
    write_g_csv(os, g);
    CHECK(os.str() == "t,re,im,err\n0.5,1,-2,1.0000000000000001e-09\n");
}

TEST_CASE("removeqT vanishes for admissible angles") {
    auto e = InitialDatum::exp_poly({1.0}, 1.0);
    auto r = removeqT_check(e, -pi / 2, 2, 0.5);
    CHECK(std::abs(r.value) <= 1e-6);
    CHECK(std::abs(r.value) <= r.bound + 1e-8);
    for (auto [th, n] : std::vector<std::pair<double, int>>{
             {-pi / 2, 2}, {-3 * pi / 4, 2}, {-pi / 6, 3}, {-5 * pi / 6, 3}, {-pi / 2, 3}})
        for (double delta : {0.25, 1.0}) {
            auto q = removeqT_check(e, th, n, delta);
            CHECK(std::abs(q.value) <= 1e-6);
        }
    CHECK(removeqT_check(InitialDatum::zero_datum(), -pi / 2, 2, 0.5).value == cplx(0));
    CHECK_THROWS_AS(removeqT_check(e, pi / 2, 2, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(removeqT_check(e, -pi / 2, 2, 0.0), std::invalid_argument);
}

TEST_CASE("removeqT truncation shrinks with rho_max") {
    auto e = InitialDatum::exp_poly({1.0}, 1.0);
    for (auto [th, n] : std::vector<std::pair<double, int>>{{-pi / 2, 2}, {-3 * pi / 4, 2}, {-pi / 6, 3}, {-pi / 2, 3}}) {
        double prev = 1e300;
        for (double P : {50.0, 400.0, 3200.0}) {
            QuadratureConfig c;
            c.rho_max = P;
            auto q = removeqT_check(e, th, n, 0.5, c, 2 * n);
            CHECK(std::abs(q.value) < prev);
            prev = std::abs(q.value);
        }
    }
}
