#include "utm/transforms.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <stdexcept>

namespace utm {

using std::numbers::pi;
static const cplx I(0, 1);

namespace {

std::vector<cplx> taylor_to_derivs(const std::vector<cplx>& c) {
    std::vector<cplx> d(c.size());
    for (std::size_t j = 0; j < c.size(); ++j) d[j] = c[j] * std::tgamma(double(j) + 1);
    return d;
}

// Taylor coefficients of poly * base, both truncated to len.
std::vector<cplx> poly_times(const std::vector<cplx>& poly, const std::vector<cplx>& base) {
    std::vector<cplx> out(base.size(), 0.0);
    for (std::size_t m = 0; m < poly.size(); ++m)
        for (std::size_t k = 0; k + m < base.size(); ++k) out[k + m] += poly[m] * base[k];
    return out;
}

cplx poly_eval(const std::vector<cplx>& p, double x) {
    cplx acc = 0;
    for (auto it = p.rbegin(); it != p.rend(); ++it) acc = acc * x + *it;
    return acc;
}

// Re-expands sum_{m=1}^K A_m p^{-m/n} in powers (1 + p)^{-e/n}, e = 1..K, using
// p^{-m/n} = sum_l (m/n)_l / l! (1 + p)^{-m/n - l}; the dropped terms are O(p^{-(K+1)/n}).
std::vector<cplx> shifted_coefficients(const std::vector<cplx>& A, int n) {
    const int K = int(A.size());
    std::vector<cplx> C(K, 0.0);
    for (int m = 1; m <= K; ++m) {
        double coef = 1;
        for (int l = 0; m + n * l <= K; ++l) {
            C[m + n * l - 1] += A[m - 1] * coef;
            coef *= (double(m) / n + l) / (l + 1);
        }
    }
    return C;
}

cplx shifted_sum(const std::vector<cplx>& C, int n, cplx rho) {
    cplx base = 1.0 - I * rho, acc = 0;
    cplx lb = std::log(base);
    for (std::size_t e = 1; e <= C.size(); ++e)
        if (C[e - 1] != 0.0) acc += C[e - 1] * std::exp(-(double(e) / n) * lb);
    return acc;
}

int asymptotic_count(const QuadratureConfig& cfg, int n, std::size_t available) {
    int K = cfg.asymptotic_terms > 0 ? cfg.asymptotic_terms : 4 * n + 1;
    return std::min<int>(K, int(available));
}

// Truncation bound for int_P^inf e^{i omega rho} f d rho given |f(P)|, with |f| ~ rho^{-gamma}.
double tail_bound(double fP, double P, double gamma, double omega) {
    double b = std::numeric_limits<double>::infinity();
    if (gamma > 1.05) b = fP * P / (gamma - 1);
    if (omega > 0) b = std::min(b, 2 * fP / omega);
    return b;
}

// Picks rho_max so that the two tails of f fall below target.
template <class F>
double choose_rho_max(F&& f, double gamma, double omega, double target, double& tail) {
    double P = 16;
    for (;;) {
        double fp = 0, fm = 0;
        for (double s : {1.0, 1.3, 1.7}) {
            fp = std::max(fp, std::abs(f(s * P)));
            fm = std::max(fm, std::abs(f(-s * P)));
        }
        tail = tail_bound(fp, P, gamma, omega) + tail_bound(fm, P, gamma, omega);
        if (tail <= target || P >= 4194304.0) return P;
        P *= 2;
    }
}

}  // namespace

double InitialDatum::cutoff(double abs_tol) const {
    if (zero) return 0;
    const double thr = 1e-2 * abs_tol, h = decay_scale / 8, hd = 1e-5 * decay_scale;
    double last = 0;
    for (int i = 0; i <= 4000; ++i) {
        double x = i * h, lo = std::max(0.0, x - hd);
        double d = std::abs(q0(x + hd) - q0(lo)) / (x + hd - lo);
        if (std::abs(q0(x)) >= thr || d >= thr) last = x;
        if (x - last > 16 * decay_scale) break;
    }
    return last + h;
}

InitialDatum InitialDatum::zero_datum() {
    InitialDatum d;
    d.q0 = [](double) { return cplx(0); };
    d.derivs.assign(40, 0.0);
    d.decay_rate = std::numeric_limits<double>::infinity();
    d.zero = true;
    d.name = "zero";
    return d;
}

InitialDatum InitialDatum::exp_poly(std::vector<cplx> poly, double kappa, int nderivs) {
    if (kappa <= 0) throw std::invalid_argument("exp_poly: kappa must be positive");
    InitialDatum d;
    d.q0 = [poly, kappa](double x) { return poly_eval(poly, x) * std::exp(-kappa * x); };
    std::vector<cplx> base(nderivs);
    double c = 1;
    for (int k = 0; k < nderivs; ++k, c *= -kappa / k) base[k] = c;
    d.derivs = taylor_to_derivs(poly_times(poly, base));
    d.decay_scale = 1 / kappa;
    d.decay_rate = kappa;
    d.name = "exp_poly";
    return d;
}

InitialDatum InitialDatum::gaussian(std::vector<cplx> poly, double center, double width, int nderivs) {
    if (width <= 0) throw std::invalid_argument("gaussian: width must be positive");
    InitialDatum d;
    d.q0 = [poly, center, width](double x) {
        double z = (x - center) / width;
        return poly_eval(poly, x) * std::exp(-z * z);
    };
    // exp(2cx/w^2 - x^2/w^2): (k+1) a_{k+1} = (2c/w^2) a_k - (2/w^2) a_{k-1}
    const double w2 = width * width, s = std::exp(-center * center / w2);
    std::vector<cplx> base(nderivs, 0.0);
    std::vector<double> a(nderivs + 1, 0.0);
    a[0] = 1;
    if (nderivs > 1) a[1] = 2 * center / w2;
    for (int k = 1; k + 1 < nderivs; ++k) a[k + 1] = (2 * center / w2 * a[k] - 2 / w2 * a[k - 1]) / (k + 1);
    for (int k = 0; k < nderivs; ++k) base[k] = s * a[k];
    d.derivs = taylor_to_derivs(poly_times(poly, base));
    d.decay_scale = width;
    d.decay_rate = std::numeric_limits<double>::infinity();
    d.name = "gaussian";
    return d;
}

Q0Hat::Q0Hat(InitialDatum datum, const QuadratureConfig& cfg) : d_(std::move(datum)), cfg_(cfg) {
    if (d_.zero) return;
    xmax_ = d_.cutoff(cfg_.abs_tol);
    auto absq = [this](double x) { return cplx(std::abs(d_.q0(x))); };
    tail_ = 2 * adaptive_gk(absq, xmax_, xmax_ + 30 * d_.decay_scale, 1e-16, 1e-6, 8).value.real();
    l1_ = adaptive_gk(absq, 0, xmax_, 1e-16, 1e-6, 8).value.real();
}

Estimate Q0Hat::operator()(cplx lambda) const {
    if (d_.zero) return {0.0, 0.0};
    const double im = lambda.imag();
    if (im > 1e-12 * std::max(1.0, std::abs(lambda)) && im >= d_.decay_rate)
        throw std::domain_error("q0_hat: lambda lies in a growth direction of e^{-i lambda x}");
    const double sigma = -im;
    double X = xmax_, cut = 0;
    if (sigma > 0 && 45 / sigma < X) {
        X = 45 / sigma;
        cut = std::exp(-45.0) * l1_;
    } else if (sigma < 0) {
        // inside the decay rate: stretch the cutoff to absorb the growth of e^{-i lambda x}
        X = std::isfinite(d_.decay_rate) ? std::min(50 * xmax_, xmax_ * d_.decay_rate / (d_.decay_rate + sigma))
                                         : xmax_ * 1.5;
    }
    double h0 = std::min(d_.decay_scale / 2, X / 8);
    if (std::abs(lambda.real()) > 0) h0 = std::min(h0, 4 / std::abs(lambda.real()));
    int init = int(std::clamp(std::ceil(X / h0), 1.0, double(cfg_.max_panels / 2)));
    auto f = [&](double x) { return std::exp(-I * lambda * x) * d_.q0(x); };
    Estimate e = adaptive_gk(f, 0, X, cfg_.abs_tol, cfg_.rel_tol, init, cfg_.max_panels + init);
    double tail = X >= xmax_ ? tail_ * std::exp(-sigma * X) : 0.0;
    e.err += tail + cut;
    return e;
}

Estimate q0_hat(const InitialDatum& datum, cplx lambda, const QuadratureConfig& cfg) {
    return Q0Hat(datum, cfg)(lambda);
}

FTransform::FTransform(const FracPowerSeries& phi, double t, int panels) : phi_(phi), t_(t) {
    if (t < 0) throw std::domain_error("F-transform at negative time");
    if (t == 0) return;
    const long q = phi.alpha().den();
    PathRule rule;
    for (int p = 0; p < panels; ++p) rule.add_segment(double(p) / panels, double(p + 1) / panels);
    const auto& w = rule.nodes();
    for (std::size_t i = 0; i < w.size(); ++i) {
        double wi = w[i].real(), s = t * std::pow(wi, double(q));
        cplx v = phi.eval(s) * (double(q) * t * std::pow(wi, double(q - 1)));
        e_.push_back(s);
        g_.push_back(rule.kronrod_weights()[i] * v);
        gg_.push_back(rule.gauss_weights()[i] * v);
    }
}

Estimate FTransform::direct(cplx mu) const {
    cplx total = 0;
    double err = 0;
    for (std::size_t p = 0; p < e_.size(); p += 21) {
        cplx k = 0, g = 0;
        for (std::size_t i = p; i < p + 21; ++i) {
            cplx ex = std::exp(mu * e_[i]);
            k += g_[i] * ex;
            g += gg_[i] * ex;
        }
        total += k;
        err += std::abs(k - g);
    }
    return {total, err};
}

cplx FTransform::leading(cplx mu) const {
    const cplx lz = std::log(-1.0 / mu);
    const double a = phi_.alpha().value();
    cplx acc = 0;
    for (std::size_t u = 0; u < phi_.size(); ++u) {
        if (phi_[u] == 0.0) continue;
        double p = u * a;
        acc += phi_[u] * gamma(p + 1) * std::exp((p + 1) * lz);
    }
    return acc;
}

Estimate FTransform::endpoint(cplx mu) const {
    static const double cuts[] = {0, 0.5, 1, 2, 3, 4.5, 6.5, 9, 12, 16, 21, 27, 34, 45};
    auto f = [&](cplx w) { return std::exp(-w) * phi_.eval(t_ - w / mu); };
    cplx total = 0;
    double err = 0;
    for (std::size_t i = 0; i + 1 < std::size(cuts); ++i) {
        Estimate e = gk21_panel(f, cuts[i], cuts[i + 1]);
        total += e.value;
        err += e.err;
    }
    // the dropped piece beyond w = 45
    err += std::exp(-45.0) * std::abs(phi_.eval(t_ + 45.0 / std::abs(mu)));
    return {total / mu, err / std::abs(mu)};
}

Estimate FTransform::operator()(cplx mu) const {
    if (t_ == 0) return {0.0, 0.0};
    if (std::abs(mu) * t_ <= switchover || mu.real() > 1e-12 * std::abs(mu)) return direct(mu);
    Estimate h = endpoint(mu);
    cplx ex = std::exp(mu * t_);
    return {leading(mu) + ex * h.value, std::abs(ex) * h.err};
}

Estimate f_transform(const FracPowerSeries& phi, cplx lambda, double t, const EquationClass& cls,
                     bool allow_growth) {
    cplx mu = cls.a * std::pow(lambda, cls.n);
    if (mu.real() > 1e-12 * std::abs(mu) && !allow_growth)
        throw std::domain_error("f_transform: Re(a lambda^n) > 0 (unstable direction)");
    return FTransform(phi, t)(mu);
}

Estimate f_transform(const std::function<cplx(double)>& phi, cplx lambda, double t, const EquationClass& cls,
                     const QuadratureConfig& cfg, bool allow_growth) {
    cplx mu = cls.a * std::pow(lambda, cls.n);
    if (mu.real() > 1e-12 * std::abs(mu) && !allow_growth)
        throw std::domain_error("f_transform: Re(a lambda^n) > 0 (unstable direction)");
    if (t < 0) throw std::domain_error("F-transform at negative time");
    if (t == 0) return {0.0, 0.0};
    int init = int(std::ceil(std::abs(mu) * t / 3)) + 1;
    return adaptive_gk([&](double s) { return std::exp(mu * s) * phi(s); }, 0, t, cfg.abs_tol, cfg.rel_tol,
                       init, cfg.max_panels + init);
}

GSamples invert_bracket(const BracketSpec& spec, const InitialDatum& datum, const std::vector<double>& t,
                        double T, const QuadratureConfig& cfg) {
    const int n = spec.n;
    if (spec.thetas.size() != spec.weights.size())
        throw std::invalid_argument("invert_bracket: one weight per theta required");
    if (int(spec.d.size()) > n - 1)
        throw std::domain_error(
            "invert_bracket: a correction term (-i rho)^{-k/n} with k >= n is not integrable at rho = 0; "
            "see the open question on the small-rho behaviour of the g-datum");
    for (double ti : t)
        if (!(ti > 0) || ti > T * (1 + 1e-12)) throw std::domain_error("g-datum sampled outside (0, T]");

    GSamples out;
    out.t = t;
    out.g.assign(t.size(), 0.0);
    out.err.assign(t.size(), 0.0);
    bool trivial = datum.zero;
    for (cplx dj : spec.d) trivial = trivial && dj == 0.0;
    if (trivial) return out;

    const int K = asymptotic_count(cfg, n, datum.derivs.size());
    std::vector<cplx> A(K, 0.0);
    for (int m = 1; m <= K; ++m) {
        for (std::size_t k = 0; k < spec.thetas.size(); ++k)
            A[m - 1] += spec.weights[k] * datum.derivs[m - 1] * std::pow(I * std::polar(1.0, spec.thetas[k]), -m);
        if (m - 1 < int(spec.d.size())) A[m - 1] -= spec.d[m - 1];
    }
    const std::vector<cplx> C = shifted_coefficients(A, n);

    QuadratureConfig inner = cfg;
    inner.abs_tol = 1e-15;
    inner.rel_tol = 1e-13;
    const Q0Hat hat(datum, inner);

    auto remainder = [&](cplx rho, double* err) {
        cplx s = principal_root(-I * rho, n);
        cplx acc = 0;
        double e = 0;
        for (std::size_t k = 0; k < spec.thetas.size(); ++k) {
            Estimate q = hat(std::polar(1.0, spec.thetas[k]) * s);
            acc += spec.weights[k] * q.value;
            e += std::abs(spec.weights[k]) * q.err;
        }
        for (std::size_t j = 0; j < spec.d.size(); ++j) acc -= spec.d[j] * std::pow(s, -double(j + 1));
        if (err) *err = e;
        return acc - shifted_sum(C, n, rho);
    };

    const double tmin = *std::min_element(t.begin(), t.end());
    const double gamma_decay = double(K + 1) / n;
    double tail = 0, P = cfg.rho_max;
    const double target = 0.1 * cfg.abs_tol / std::max(1.0, std::abs(spec.prefactor)) * 2 * pi;
    if (P <= 0) {
        P = choose_rho_max([&](double r) { return remainder(r, nullptr); }, gamma_decay, tmin, target, tail);
    } else {
        double fp = std::abs(remainder(P, nullptr)), fm = std::abs(remainder(-P, nullptr));
        tail = tail_bound(fp, P, gamma_decay, tmin) + tail_bound(fm, P, gamma_decay, tmin);
    }

    const double r = cfg.R_arc, hmax = 4 * cfg.panel_scale / T;
    PathRule rule;
    rule.add_graded(-P, -r, cfg.panel_ratio, hmax);
    auto arc = [r](double s) { return r * std::exp(I * (pi - s)); };
    auto darc = [r](double s) { return -I * r * std::exp(I * (pi - s)); };
    rule.add_curve(arc, darc, 0, pi / 2);
    rule.add_curve(arc, darc, pi / 2, pi);
    rule.add_graded(r, P, cfg.panel_ratio, hmax);

    const auto& z = rule.nodes();
    std::vector<cplx> vals(z.size());
    std::vector<double> verr(z.size());
    parallel_for(z.size(), [&](std::size_t i) { vals[i] = remainder(z[i], &verr[i]); });
    double node_err = 0;
    for (std::size_t i = 0; i < z.size(); ++i) node_err += std::abs(rule.kronrod_weights()[i]) * verr[i];

    std::vector<cplx> kernel(z.size());
    for (std::size_t it = 0; it < t.size(); ++it) {
        const double ti = t[it];
        for (std::size_t i = 0; i < z.size(); ++i) kernel[i] = std::exp(-I * z[i] * ti);
        Estimate q = rule.integrate(vals, kernel);
        cplx closed = 0;
        for (int e = 1; e <= K; ++e)
            if (C[e - 1] != 0.0) {
                double nu = double(e) / n;
                closed += C[e - 1] * std::pow(ti, nu - 1) * std::exp(-ti) / gamma(nu);
            }
        out.g[it] = spec.prefactor * (q.value / (2 * pi) + closed);
        out.err[it] = std::abs(spec.prefactor) * (q.err + tail + node_err) / (2 * pi);
    }
    out.rho_max = P;
    out.asymptotic_terms = K;
    return out;
}

BracketSpec bracket_spec(ProblemKind kind, const InitialDatum& datum, const GDatumOptions& opt) {
    const cplx y0 = datum.derivs.empty() ? datum.q0(0.0) : datum.derivs[0];
    BracketSpec s;
    switch (kind) {
    case ProblemKind::heat:
        s.n = 2;
        s.thetas = enumerate_theta(validate_class(2, 1.0, 1));
        s.weights = {1.0};
        s.d = {opt.heat_plus_q0_sign ? -y0 : y0};
        break;
    case ProblemKind::ls:
        s.n = 2;
        s.thetas = enumerate_theta(validate_class(2, I, 1));
        s.weights = {1.0};
        s.d = {std::sqrt(I) * y0};
        s.prefactor = -I;
        break;
    case ProblemKind::lkdv1: {
        s.n = 3;
        s.thetas = enumerate_theta(validate_class(3, -I, 1));
        const double r3 = std::sqrt(3.0);
        s.weights = {std::polar(1.0, -s.thetas[0]) / r3, -std::polar(1.0, -s.thetas[1]) / r3};
        s.d = {y0};
        break;
    }
    case ProblemKind::lkdv2:
        s.n = 3;
        s.thetas = enumerate_theta(validate_class(3, I, 2));
        s.weights = {1.0};
        s.d = {y0, -opt.b0 * y0};
        break;
    }
    return s;
}

GSamples g_datum(ProblemKind kind, const InitialDatum& datum, const std::vector<double>& t, double T,
                 const QuadratureConfig& cfg, const GDatumOptions& opt) {
    GSamples g = invert_bracket(bracket_spec(kind, datum, opt), datum, t, T, cfg);
    // the F[h] term inverts to h itself on (0, T)
    if (kind == ProblemKind::ls && opt.h)
        for (std::size_t i = 0; i < t.size(); ++i) g.g[i] -= opt.h(t[i]);
    return g;
}

void write_g_csv(std::ostream& os, const GSamples& g) {
    os.precision(17);
    os << "t,re,im,err\n";
    for (std::size_t i = 0; i < g.t.size(); ++i)
        os << g.t[i] << ',' << g.g[i].real() << ',' << g.g[i].imag() << ',' << g.err[i] << '\n';
}

RemoveqTResult removeqT_check(const InitialDatum& phi, double theta, int n, double delta,
                              const QuadratureConfig& cfg, int subtract_terms) {
    if (n < 2) throw std::invalid_argument("removeqT_check: n must be at least 2");
    const double tol = 1e-12;
    if (theta < -pi + pi / (2 * n) - tol || theta > -pi / (2 * n) + tol)
        throw std::invalid_argument("removeqT_check: theta outside [-pi + pi/2n, -pi/2n]");
    if (!(delta > 0)) throw std::invalid_argument("removeqT_check: requires t < T");
    if (phi.zero) return {0.0, 0.0, 0.0};

    const int K = subtract_terms < 0 ? asymptotic_count(cfg, n, phi.derivs.size())
                                     : std::min<int>(subtract_terms, int(phi.derivs.size()));
    std::vector<cplx> A(K);
    for (int m = 1; m <= K; ++m) A[m - 1] = phi.derivs[m - 1] * std::pow(I * std::polar(1.0, theta), -m);
    const std::vector<cplx> C = shifted_coefficients(A, n);

    QuadratureConfig inner = cfg;
    inner.abs_tol = 1e-15;
    inner.rel_tol = 1e-13;
    const Q0Hat hat(phi, inner);
    auto f = [&](cplx rho, double* err) {
        Estimate q = hat(std::polar(1.0, theta) * principal_root(-I * rho, n));
        if (err) *err = q.err;
        return q.value - shifted_sum(C, n, rho);
    };

    double tail = 0, P = cfg.rho_max;
    const double gamma_decay = double(K + 1) / n;
    if (P <= 0) {
        P = choose_rho_max([&](double r) { return f(r, nullptr); }, gamma_decay, delta, 0.1 * cfg.abs_tol, tail);
    } else {
        tail = tail_bound(std::abs(f(P, nullptr)), P, gamma_decay, delta) +
               tail_bound(std::abs(f(-P, nullptr)), P, gamma_decay, delta);
    }

    const double eps = 1e-12;
    PathRule rule;
    const double hmax = 4 * cfg.panel_scale / delta;
    rule.add_graded(-P, -eps, cfg.panel_ratio, hmax);
    rule.add_graded(eps, P, cfg.panel_ratio, hmax);
    const auto& z = rule.nodes();
    std::vector<cplx> vals(z.size());
    std::vector<double> verr(z.size());
    parallel_for(z.size(), [&](std::size_t i) { vals[i] = f(z[i], &verr[i]) * std::exp(I * z[i] * delta); });
    Estimate q = rule.integrate(vals);
    double node_err = 0;
    for (std::size_t i = 0; i < z.size(); ++i) node_err += std::abs(rule.kronrod_weights()[i]) * verr[i];
    double gap = 2 * eps * std::abs(f(0.0, nullptr));
    return {q.value, tail + q.err + node_err + gap, P};
}

}  // namespace utm
