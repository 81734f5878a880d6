#include "utm/oracle.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace utm {

namespace {

// Lagrange weights through the four uniform nodes nearest s (grid units); returns the first index
std::size_t cubic_weights(double s, std::size_t n, double w[4]) {
    const std::size_t i0 = std::min<std::size_t>(std::max(0.0, std::floor(s) - 1), n - 4);
    for (int a = 0; a < 4; ++a) {
        w[a] = 1;
        for (int c = 0; c < 4; ++c)
            if (c != a) w[a] *= (s - double(i0) - c) / double(a - c);
    }
    return i0;
}

FdSolution fd_solve(cplx c, const InitialDatum& q0, const std::function<cplx(double)>& b,
                    const std::function<cplx(double)>& h, double T, const FdGrid& g, const FdOptions& opt) {
    if (g.nx < 16 || g.nt < 16) throw std::invalid_argument("fd_solve: nx and nt must be at least 16");
    if (!(g.x_max > 0) || !(T > 0)) throw std::invalid_argument("fd_solve: x_max and T must be positive");
    if (!(g.theta >= 0.5 && g.theta <= 1)) throw std::invalid_argument("fd_solve: theta must lie in [1/2, 1]");
    const double dx = g.x_max / g.nx, dt = T / g.nt;
    const cplx d0 = q0.q0(0.0);
    const cplx d1 = q0.derivs.size() > 1 ? q0.derivs[1] : (q0.q0(1e-5) - q0.q0(-1e-5)) / 2e-5;
    const cplx r = b(0) * d0 + d1 - h(0);
    if (std::abs(r) > opt.compat_tol)
        throw CompatibilityError("fd_solve: condition 1 residual " + std::to_string(std::abs(r)));

    FdSolution s;
    s.x.resize(g.nx + 1);
    s.t.resize(g.nt + 1);
    for (int k = 0; k <= g.nx; ++k) s.x[k] = k * dx;
    for (int i = 0; i <= g.nt; ++i) s.t[i] = i * dt;
    s.q = Eigen::MatrixXcd::Zero(g.nt + 1, g.nx + 1);
    for (int k = 0; k < g.nx; ++k) s.q(0, k) = q0.q0(s.x[k]);
    s.y.assign(g.nt + 1, 0.0);
    s.y[0] = d0;

    // unknowns q_0..q_{nx-1}; q_nx = 0
    const int m = g.nx;
    Eigen::VectorXcd u = s.q.row(0).head(m).transpose();
    auto step = [&](double t1, double k, double th) {
        const cplx mu = c * k / (dx * dx);
        std::vector<Eigen::Triplet<cplx>> tr;
        tr.reserve(3 * m);
        Eigen::VectorXcd rhs(m);
        tr.emplace_back(0, 0, b(t1) - 1.5 / dx);
        tr.emplace_back(0, 1, 2.0 / dx);
        tr.emplace_back(0, 2, -0.5 / dx);
        rhs[0] = h(t1);
        for (int j = 1; j < m; ++j) {
            tr.emplace_back(j, j, 1.0 + 2.0 * th * mu);
            tr.emplace_back(j, j - 1, -th * mu);
            if (j + 1 < m) tr.emplace_back(j, j + 1, -th * mu);
            const cplx right = j + 1 < m ? u[j + 1] : 0.0;
            rhs[j] = u[j] + (1 - th) * mu * (u[j - 1] - 2.0 * u[j] + right);
        }
        Eigen::SparseMatrix<cplx> A(m, m);
        A.setFromTriplets(tr.begin(), tr.end());
        Eigen::SparseLU<Eigen::SparseMatrix<cplx>> lu;
        lu.compute(A);
        if (lu.info() != Eigen::Success) throw std::runtime_error("fd_solve: singular step matrix");
        u = lu.solve(rhs);
    };
    for (int i = 1; i <= g.nt; ++i) {
        if (g.theta == 0.5 && i <= opt.startup_steps) {
            step(s.t[i - 1] + dt / 2, dt / 2, 1.0);
            step(s.t[i], dt / 2, 1.0);
        } else {
            step(s.t[i], dt, g.theta);
        }
        s.q.row(i).head(m) = u.transpose();
        s.y[i] = u[0];
    }
    return s;
}

}  // namespace

cplx FdSolution::at(double xq, double tq) const {
    if (x.empty() || t.empty()) throw std::logic_error("FdSolution::at: empty solution");
    if (xq < x.front() || xq > x.back() || tq < t.front() || tq > t.back())
        throw std::invalid_argument("FdSolution::at: point outside the grid");
    const double dx = x[1] - x[0], dt = t[1] - t[0];
    double wx[4], wt[4];
    const std::size_t kx = cubic_weights(xq / dx, x.size(), wx);
    const std::size_t it = cubic_weights(tq / dt, t.size(), wt);
    cplx acc = 0;
    for (int a = 0; a < 4; ++a)
        for (int c = 0; c < 4; ++c)
            if (wt[a] != 0 && wx[c] != 0) acc += wt[a] * wx[c] * q(it + a, kx + c);
    return acc;
}

std::vector<GridSample> FdSolution::grid(const std::vector<double>& xs, const std::vector<double>& ts) const {
    std::vector<GridSample> out;
    out.reserve(xs.size() * ts.size());
    for (double xq : xs)
        for (double tq : ts) out.push_back({xq, tq, at(xq, tq), 0});
    return out;
}

FdSolution fd_solve_heat(const InitialDatum& q0, const std::function<cplx(double)>& b,
                         const std::function<cplx(double)>& h, double T, const FdGrid& grid, const FdOptions& opt) {
    return fd_solve(1.0, q0, b, h, T, grid, opt);
}

FdSolution fd_solve_ls(const InitialDatum& q0, const std::function<cplx(double)>& b,
                       const std::function<cplx(double)>& h, double T, const FdGrid& grid, const FdOptions& opt) {
    return fd_solve(cplx(0, 1), q0, b, h, T, grid, opt);
}

double neumann_image_gaussian(double x, double t, double c) {
    if (t < 0) throw std::invalid_argument("neumann_image_gaussian: t must be nonnegative");
    if (t == 0) return std::exp(-(x - c) * (x - c));
    const double s = 1 + 4 * t, P = s / (4 * t);
    auto half = [&](double xx) {
        const double m = (xx + 4 * t * c) / s;
        return std::exp(-(xx - c) * (xx - c) / s) / std::sqrt(s) * 0.5 * std::erfc(-m * std::sqrt(P));
    };
    return half(x) + half(-x);
}

Estimate mittag_leffler(double alpha, cplx z, int terms, double tol) {
    if (!(alpha > 0)) throw std::invalid_argument("mittag_leffler: alpha must be positive");
    if (terms < 1) throw std::invalid_argument("mittag_leffler: terms must be positive");
    if (z == 0.0) return {1.0, 0};
    const double lz = std::log(std::abs(z)), ph = std::arg(z);
    auto mag = [&](int k) { return std::exp(k * lz - std::lgamma(k * alpha + 1)); };
    cplx sum = 0;
    double abs_sum = 0;
    for (int k = 0; k < terms; ++k) {
        const double a = mag(k);
        sum += std::polar(a, k * ph);
        abs_sum += a;
    }
    // terms below eps * abs_sum do not change the rounded sum
    int live = 0;
    for (int k = 0; k < terms; ++k) live += mag(k) > std::numeric_limits<double>::epsilon() * abs_sum;
    const double ratio = std::exp(lz + std::lgamma(terms * alpha + 1) - std::lgamma((terms + 1) * alpha + 1));
    if (!(ratio < 1)) throw TailNotCertified("mittag_leffler: terms still growing at k = " + std::to_string(terms));
    const double err = mag(terms) / (1 - ratio) + 2 * live * std::numeric_limits<double>::epsilon() * abs_sum;
    if (!(err <= tol * std::max(1.0, std::abs(sum))))
        throw TailNotCertified("mittag_leffler: error bound " + std::to_string(err) + " above tolerance");
    return {sum, err};
}

}  // namespace utm
