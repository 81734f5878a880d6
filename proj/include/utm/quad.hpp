#pragma once

#include <complex>
#include <functional>
#include <thread>
#include <vector>

namespace utm {

using cplx = std::complex<double>;

struct Estimate {
    cplx value;
    double err;
};

// 21-point Kronrod nodes on [-1, 1] with the embedded 10-point Gauss weights
// (zero on the nodes Gauss does not use).
struct GK21 {
    double x[21], wk[21], wg[21];
    static const GK21& get();
};

// One GK21 panel of f over the straight segment [a, b] in the complex plane.
Estimate gk21_panel(const std::function<cplx(cplx)>& f, cplx a, cplx b);

// Globally adaptive GK21 on the real interval [a, b], starting from `initial` equal panels.
Estimate adaptive_gk(const std::function<cplx(double)>& f, double a, double b, double abs_tol,
                     double rel_tol, int initial = 1, int max_panels = 4000);

// Composite GK21 rule along a piecewise path; nodes are fixed so integrand values can be cached.
class PathRule {
public:
    // Straight panel from a to b.
    void add_segment(cplx a, cplx b);
    // Panel in a parameter s in [s0, s1] along the curve z(s) with derivative dz(s).
    void add_curve(const std::function<cplx(double)>& z, const std::function<cplx(double)>& dz,
                   double s0, double s1);
    // Splits [a, b] (a, b > 0 or both < 0) into panels growing geometrically by `ratio`
    // from the end nearest zero, capped at width `hmax`.
    void add_graded(double a, double b, double ratio, double hmax);
    void append(const PathRule& other);

    const std::vector<cplx>& nodes() const { return z_; }
    const std::vector<cplx>& kronrod_weights() const { return wk_; }
    const std::vector<cplx>& gauss_weights() const { return wg_; }
    std::size_t size() const { return z_.size(); }
    std::size_t panels() const { return z_.size() / 21; }

    // Integral of cached values; err sums |Kronrod - Gauss| over panels.
    Estimate integrate(const std::vector<cplx>& values) const;
    Estimate integrate(const std::function<cplx(cplx)>& f) const;
    // Same, with an extra per-node factor (values[i] * factor[i]).
    Estimate integrate(const std::vector<cplx>& values, const std::vector<cplx>& factor) const;

private:
    std::vector<cplx> z_, wk_, wg_;
};

// Deterministic parallel loop: index i is always computed by f(i), results land in place.
template <class F>
void parallel_for(std::size_t n, F&& f) {
    unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    std::size_t workers = std::min<std::size_t>(hw, n / 64 + 1);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) f(i);
        return;
    }
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w)
        pool.emplace_back([&, w] {
            for (std::size_t i = w; i < n; i += workers) f(i);
        });
    for (auto& th : pool) th.join();
}

}  // namespace utm
