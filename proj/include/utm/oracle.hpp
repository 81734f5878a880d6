#pragma once

#include <functional>
#include <ostream>
#include <vector>

#include <Eigen/Dense>

#include "utm/ehrenpreis.hpp"

namespace utm {

struct FdGrid {
    double x_max = 20;
    int nx = 400;
    int nt = 200;
    double theta = 0.5;   // 1/2: Crank-Nicolson, 1: backward Euler
};

struct FdSolution {
    std::vector<double> x, t;
    Eigen::MatrixXcd q;           // q(i, k) at (t[i], x[k])
    std::vector<cplx> y;          // boundary trace q(0, t[i])

    // Cubic Lagrange interpolation in x and t.
    cplx at(double x, double t) const;
    std::vector<GridSample> grid(const std::vector<double>& xs, const std::vector<double>& ts) const;
};

struct FdOptions {
    double compat_tol = 1e-8;
    int startup_steps = 2;        // theta = 1/2: the first steps are split into backward Euler half steps
};

// q_t = q_xx on [0, x_max] with b(t) q(0,t) + q_x(0,t) = h(t), one-sided second-order boundary row,
// q(x_max, t) = 0. Throws CompatibilityError if b(0) q0(0) + q0'(0) - h(0) exceeds compat_tol.
FdSolution fd_solve_heat(const InitialDatum& q0, const std::function<cplx(double)>& b,
                         const std::function<cplx(double)>& h, double T, const FdGrid& grid = {},
                         const FdOptions& opt = {});

// i q_t + q_xx = 0 with the same boundary rows. No accuracy claims are attached.
FdSolution fd_solve_ls(const InitialDatum& q0, const std::function<cplx(double)>& b,
                       const std::function<cplx(double)>& h, double T, const FdGrid& grid = {},
                       const FdOptions& opt = {});

// Neumann heat solution for q0 = e^{-(x - c)^2} by the even image: free-space kernel on the half line
// plus its reflection, each in closed form through erfc.
double neumann_image_gaussian(double x, double t, double c);

struct TailNotCertified : std::domain_error {
    using std::domain_error::domain_error;
};

// sum_{k < terms} z^k / Gamma(k alpha + 1). err bounds the tail (terms decay geometrically past the last
// one since Gamma(x)/Gamma(x + alpha) decreases) plus accumulated rounding. Throws TailNotCertified
// when the last term ratio is not below 1 or err exceeds tol.
Estimate mittag_leffler(double alpha, cplx z, int terms = 200, double tol = 1e-10);

}  // namespace utm
