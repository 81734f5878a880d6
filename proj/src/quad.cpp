#include "utm/quad.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <stdexcept>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace utm {

const GK21& GK21::get() {
    static const GK21 rule = [] {
        using boost::math::quadrature::gauss;
        using boost::math::quadrature::gauss_kronrod;
        const auto& kx = gauss_kronrod<double, 21>::abscissa();
        const auto& kw = gauss_kronrod<double, 21>::weights();
        const auto& gw = gauss<double, 10>::weights();
        GK21 r{};
        r.x[10] = 0;
        r.wk[10] = kw[0];
        r.wg[10] = 0;
        for (int i = 1; i <= 10; ++i) {
            double g = (i % 2 == 1) ? gw[(i - 1) / 2] : 0.0;
            r.x[10 + i] = kx[i];
            r.x[10 - i] = -kx[i];
            r.wk[10 + i] = r.wk[10 - i] = kw[i];
            r.wg[10 + i] = r.wg[10 - i] = g;
        }
        return r;
    }();
    return rule;
}

Estimate gk21_panel(const std::function<cplx(cplx)>& f, cplx a, cplx b) {
    const auto& r = GK21::get();
    cplx mid = 0.5 * (a + b), half = 0.5 * (b - a);
    cplx k = 0, g = 0;
    for (int i = 0; i < 21; ++i) {
        cplx v = f(mid + half * r.x[i]);
        k += r.wk[i] * v;
        g += r.wg[i] * v;
    }
    return {half * k, std::abs(half * (k - g))};
}

Estimate adaptive_gk(const std::function<cplx(double)>& f, double a, double b, double abs_tol,
                     double rel_tol, int initial, int max_panels) {
    struct Panel {
        double a, b;
        Estimate e;
        bool operator<(const Panel& o) const { return e.err < o.e.err; }
    };
    auto fc = [&](cplx z) { return f(z.real()); };
    std::priority_queue<Panel> heap;
    cplx total = 0;
    double err = 0;
    initial = std::max(1, initial);
    for (int i = 0; i < initial; ++i) {
        double lo = a + (b - a) * i / initial, hi = a + (b - a) * (i + 1) / initial;
        Panel p{lo, hi, gk21_panel(fc, lo, hi)};
        total += p.e.value;
        err += p.e.err;
        heap.push(p);
    }
    int count = initial;
    while (err > std::max(abs_tol, rel_tol * std::abs(total)) && count < max_panels) {
        Panel p = heap.top();
        heap.pop();
        // stop refining panels that are already at rounding level
        if (p.b - p.a < 1e-14 * std::max(1.0, std::abs(p.a))) break;
        double m = 0.5 * (p.a + p.b);
        Panel l{p.a, m, gk21_panel(fc, p.a, m)}, r{m, p.b, gk21_panel(fc, m, p.b)};
        total += l.e.value + r.e.value - p.e.value;
        err += l.e.err + r.e.err - p.e.err;
        heap.push(l);
        heap.push(r);
        ++count;
    }
    // recompute sums to shed accumulated cancellation
    total = 0;
    err = 0;
    while (!heap.empty()) {
        total += heap.top().e.value;
        err += heap.top().e.err;
        heap.pop();
    }
    return {total, err};
}

void PathRule::add_segment(cplx a, cplx b) {
    const auto& r = GK21::get();
    cplx mid = 0.5 * (a + b), half = 0.5 * (b - a);
    for (int i = 0; i < 21; ++i) {
        z_.push_back(mid + half * r.x[i]);
        wk_.push_back(half * r.wk[i]);
        wg_.push_back(half * r.wg[i]);
    }
}

void PathRule::add_curve(const std::function<cplx(double)>& z, const std::function<cplx(double)>& dz,
                         double s0, double s1) {
    const auto& r = GK21::get();
    double mid = 0.5 * (s0 + s1), half = 0.5 * (s1 - s0);
    for (int i = 0; i < 21; ++i) {
        double s = mid + half * r.x[i];
        cplx d = dz(s);
        z_.push_back(z(s));
        wk_.push_back(half * r.wk[i] * d);
        wg_.push_back(half * r.wg[i] * d);
    }
}

void PathRule::add_graded(double a, double b, double ratio, double hmax) {
    if (a == b) return;
    if (a * b < 0) throw std::invalid_argument("add_graded: interval straddles zero");
    bool neg = a < 0 || b < 0;
    double lo = std::min(std::abs(a), std::abs(b)), hi = std::max(std::abs(a), std::abs(b));
    std::vector<double> cuts{lo};
    double c = lo;
    while (c < hi) {
        double w = std::min(hmax, std::max(c * (ratio - 1), 1e-300));
        c = std::min(hi, c + w);
        if (hi - c < 0.05 * w) c = hi;
        cuts.push_back(c);
    }
    // traverse in the direction a -> b
    bool forward = std::abs(a) <= std::abs(b);
    std::size_t m = cuts.size();
    for (std::size_t i = 0; i + 1 < m; ++i) {
        double p = forward ? cuts[i] : cuts[m - 1 - i];
        double q = forward ? cuts[i + 1] : cuts[m - 2 - i];
        if (neg) p = -p, q = -q;
        add_segment(p, q);
    }
}

void PathRule::append(const PathRule& o) {
    z_.insert(z_.end(), o.z_.begin(), o.z_.end());
    wk_.insert(wk_.end(), o.wk_.begin(), o.wk_.end());
    wg_.insert(wg_.end(), o.wg_.begin(), o.wg_.end());
}

Estimate PathRule::integrate(const std::vector<cplx>& v) const {
    if (v.size() != z_.size()) throw std::invalid_argument("PathRule: value count mismatch");
    cplx total = 0;
    double err = 0;
    for (std::size_t p = 0; p < z_.size(); p += 21) {
        cplx k = 0, g = 0;
        for (std::size_t i = p; i < p + 21; ++i) {
            k += wk_[i] * v[i];
            g += wg_[i] * v[i];
        }
        total += k;
        err += std::abs(k - g);
    }
    return {total, err};
}

Estimate PathRule::integrate(const std::function<cplx(cplx)>& f) const {
    std::vector<cplx> v(z_.size());
    for (std::size_t i = 0; i < z_.size(); ++i) v[i] = f(z_[i]);
    return integrate(v);
}

Estimate PathRule::integrate(const std::vector<cplx>& v, const std::vector<cplx>& factor) const {
    if (v.size() != z_.size() || factor.size() != z_.size())
        throw std::invalid_argument("PathRule: value count mismatch");
    cplx total = 0;
    double err = 0;
    for (std::size_t p = 0; p < z_.size(); p += 21) {
        cplx k = 0, g = 0;
        for (std::size_t i = p; i < p + 21; ++i) {
            cplx f = v[i] * factor[i];
            k += wk_[i] * f;
            g += wg_[i] * f;
        }
        total += k;
        err += std::abs(k - g);
    }
    return {total, err};
}

}  // namespace utm
