#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "utm/fraccalc.hpp"
#include "utm/spectral.hpp"
#include "utm/transforms.hpp"

namespace utm {

struct CompatibilityError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Boundary conditions per class:
//   heat:  b y + q_x = 0                         (q_t = q_xx)
//   ls:    b y + q_x = h                         (i q_t + q_xx = 0)
//   lkdv1: b y + q_xx = 0                        (q_t + q_xxx = 0)
//   lkdv2: b y + q_x = 0,  beta y + q_xx = 0     (q_t - q_xxx = 0)
struct ProblemSpec {
    ProblemKind kind = ProblemKind::heat;
    FracPowerSeries b = FracPowerSeries::zero(Rational(1, 2));
    FracPowerSeries beta = FracPowerSeries::zero(Rational(1, 3));
    FracPowerSeries h = FracPowerSeries::zero(Rational(1, 2));
    InitialDatum q0 = InitialDatum::zero_datum();
    double T = 1;

    EquationClass cls() const;
    // Series step of every coefficient series: 1/n, except 2/3 for LKdV1.
    Rational alpha() const;
    // b_kj(t) with k the condition index (1-based) and j the derivative order.
    std::map<std::pair<int, int>, FracPowerSeries> b_coeffs() const;
    std::vector<FracPowerSeries> h_coeffs() const;
    // sum_j b_kj(0) q0^{(j)}(0) - h_k(0), one entry per condition.
    std::vector<cplx> compatibility_residuals() const;
    // Throws CompatibilityError naming every failing condition; also checks series steps.
    void validate(double tol = 1e-8) const;
};

struct UnsupportedClass : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// The four supported classes; any other (n, a, N) throws UnsupportedClass.
ProblemKind problem_kind(const EquationClass& cls);

ProblemSpec make_problem(ProblemKind kind, InitialDatum q0, FracPowerSeries b, double T);

// Recurrences for the Caputo coefficients. Series are truncated to U + 1 terms; Y_0 = y0.
FracPowerSeries heat_recurrence(const FracPowerSeries& B, const FracPowerSeries& G, cplx y0, int U);
FracPowerSeries ls_recurrence(const FracPowerSeries& B, const FracPowerSeries& G, cplx y0, int U);
FracPowerSeries lkdv1_recurrence(const FracPowerSeries& B, const FracPowerSeries& G, cplx y0, int U);
// Y_1 = 0 and Y_{u+2} = G(u+4)/G(u+5) sum_{v<=u+1} Y_v B_{u+1-v} + G(u+3)/G(u+5) (G_u + sum_{v<=u} Y_v Beta_{u-v}),
// G(k) = Gamma(k/3). lagged_index uses B_{u-v} (zero at index -1) in the first sum instead.
FracPowerSeries lkdv2_recurrence(const FracPowerSeries& B, const FracPowerSeries& Beta, const FracPowerSeries& G,
                                 cplx y0, int U, bool lagged_index = false);

// Right side g_k of the k-th fractional ODE of a general class, k in N+1..n.
GSamples general_flode_rhs(const EquationClass& cls, const InitialDatum& q0, int k, const std::vector<double>& t,
                           double T, const QuadratureConfig& cfg = {});

// g samples feed a fit whose condition estimate reaches ~1e13, so they are taken tighter than the default
inline QuadratureConfig fit_quadrature() {
    QuadratureConfig q;
    q.abs_tol = 1e-13;
    q.rel_tol = 1e-11;
    return q;
}

struct DtnOptions {
    int U = 16;
    int fit_order = 16;              // G is fitted with max(U, fit_order) terms, so Y_0..Y_U do not depend on U
    QuadratureConfig quad = fit_quadrature();
    double t_lo_frac = 1.0 / 50;     // fit window [t_lo_frac T, T]
    int n_fit = 0;                   // 0: max(3(U+1), 48) Chebyshev nodes
    FitOptions fit = {.cond_bound = 1e15};
    double overflow_guard = 1e8;
    int residual_steps = 4000;       // uniform L1 grid on [0, T]
    bool lagged_lkdv2_index = false;
    bool heat_plus_q0_sign = false;
};

struct ResidualReport {
    double t_from = 0, t_to = 0;
    double sup = 0;                  // sup |FLODE residual| on [t_from, t_to]
    std::vector<double> t;
    std::vector<cplx> r;
};

struct DtnSolution {
    std::map<int, FracPowerSeries> y;   // y[j] = d^j q / dx^j (0, t)
    int U = 0;
    bool truncated = false;             // overflow guard stopped the recurrence early
    std::string note;
    FracPowerSeries G = FracPowerSeries::zero(Rational(1, 2));
    double fit_residual = 0, fit_cond = 0;
    GSamples g;                         // samples used for the fit
    // sup_t |y_j - y_j'| with y' refitted on every other node, plus the last retained term of y_j at T;
    // empty for exact boundary series
    std::map<int, double> trace_uncertainty;
    ResidualReport flode_residual_report;
};

DtnSolution solve_dtn(const ProblemSpec& problem, const DtnOptions& opt = {});
DtnSolution solve_dtn(const ProblemSpec& problem, int U);

// DtN data for a known boundary series y: G is the FLODE operator applied to y (terms complete in y),
// and Y_0..Y_U come from the recurrence. Used to build exact fixtures without sampling or fitting.
DtnSolution dtn_from_boundary_series(const ProblemSpec& problem, const FracPowerSeries& y, int U);

// FLODE residual of y against g sampled on a uniform grid, using the L1 scheme with one Richardson step.
ResidualReport flode_residual(const ProblemSpec& problem, const FracPowerSeries& y,
                              const std::function<cplx(double)>& g, int steps, double t_from);

nlohmann::json to_json(const DtnSolution& s);

}  // namespace utm
