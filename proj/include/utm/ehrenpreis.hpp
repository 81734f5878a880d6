#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <ostream>
#include <vector>

#include "utm/dtn.hpp"

namespace utm {

// Boundary integrand of the Ehrenpreis form at lambda, with the F-transforms taken over [0, tau].
// heat: F[(i lambda - b) y]; LS: F[(i lambda - b) y + h];
// LKdV1: (1 - alpha) F[(lambda^2 - alpha^2 b) y] + alpha^2 q0_hat(alpha lambda), alpha = e^{2 pi i/3};
// LKdV2: F[(-lambda^2 - i lambda b - beta) y].
Estimate assemble_boundary_integrand(const ProblemSpec& problem, const DtnSolution& dtn, cplx lambda,
                                     double tau = -1, const QuadratureConfig& cfg = {});

// The same integrand written as sum_j c_j(lambda) F[phi_j] for LKdV1, with f_1 recovered from the
// global relation at alpha lambda (the q_hat(alpha lambda; tau) term dropped).
Estimate lkdv1_generic_integrand(const ProblemSpec& problem, const DtnSolution& dtn, cplx lambda,
                                 double tau = -1, const QuadratureConfig& cfg = {});

struct FieldOptions {
    QuadratureConfig quad;
    double R = 1;          // inner radius of the contour in lambda
    double tau = -1;       // < 0: T
    double x_max = 12;     // cached nodes resolve e^{i lambda x} up to this x
};

struct FieldValue {
    cplx value = 0;
    double err = 0;
    bool converged = true;
};

class SolutionField {
public:
    SolutionField(ProblemSpec problem, DtnSolution dtn, FieldOptions opt = {});

    // d^dx/dx^dx d^dt/dt^dt q_U(x, t), differentiating under the integrals.
    FieldValue evaluate(double x, double t, int dx = 0, int dt = 0) const;
    // Same with an explicit contour radius and tau.
    FieldValue evaluate_with(double x, double t, double R, double tau, int dx = 0, int dt = 0) const;
    // Row-major grid, value[i * ts.size() + j] = q(xs[i], ts[j]).
    std::vector<FieldValue> evaluate_grid(const std::vector<double>& xs, const std::vector<double>& ts) const;

    const ProblemSpec& problem() const { return p_; }
    const DtnSolution& dtn() const { return d_; }
    const FieldOptions& options() const { return opt_; }
    double tau() const { return opt_.tau < 0 ? p_.T : opt_.tau; }
    double tolerance(cplx value) const;

    // Boundary data phi_j entering sum_j c_j F[phi_j]; LKdV1 uses its effective pair and an extra q0_hat term.
    const std::vector<FracPowerSeries>& boundary_series() const { return phi_; }

    struct Center;
    struct TauTail;
    struct RealLeg;

private:
    ProblemSpec p_;
    DtnSolution d_;
    FieldOptions opt_;
    EquationClass cls_;
    std::vector<FracPowerSeries> phi_;
    bool extra_q0_ = false;               // LKdV1
    std::shared_ptr<Q0Hat> q0hat_;
    std::vector<cplx> Atil_;              // S_K(lambda) = sum_m Atil_m (i lambda - 1)^{-m}
    std::vector<cplx> beta_;              // S_K(lambda) = sum_k beta_k (i lambda)^{-k}, k >= 1
    std::vector<cplx> asym_;              // q0_hat ~ sum_m asym_m (i lambda)^{-m}
    std::shared_ptr<RealLeg> real_;

    mutable std::mutex mu_;
    mutable std::map<std::pair<double, double>, std::shared_ptr<Center>> centers_;
    mutable std::map<double, std::shared_ptr<TauTail>> tails_;

    std::shared_ptr<Center> center(double R, double tau) const;
    std::shared_ptr<TauTail> tau_tail(double tau) const;
    double rho_c(double tau) const;

    cplx s_k(cplx lambda) const;
    Estimate extra(cplx lambda) const;
    cplx zero_density(int k, cplx rho, double tau, double* err) const;
    Estimate real_leg(double x, double t, int dx, int dt) const;
    Estimate sector_integral(int k, double x, double t, double R, double tau, int dx, int dt, bool* ok) const;
    Estimate zero_tails(int k, double x, double t, double tau, int dx, int dt, bool* ok) const;
    Estimate tau_tails(int k, double x, double t, double tau, int dx, int dt, bool* ok) const;
    Estimate power_tail(int k, double rb, double tau, bool zero_group) const;
};

struct GridSample {
    double x = 0, t = 0;
    cplx value = 0;
    double err = 0;
};

// Samples in the same row-major order as evaluate_grid.
std::vector<GridSample> field_grid(const SolutionField& field, const std::vector<double>& xs,
                                   const std::vector<double>& ts);
// Header "x,t,re,im,err", one row per sample, 17 significant digits.
void write_grid_csv(std::ostream& os, const std::vector<GridSample>& samples);

struct GrResidual {
    cplx residual;
    double bound;      // composed quadrature bound
    double data_bound = 0; // trace uncertainty of the DtN data carried through the F-transforms
    cplx qhat;         // transform of the evaluated field over x
};

// q0_hat(lambda) - e^{a lambda^n t} q_hat(lambda; t) - sum_j c_j f_j(lambda; t), Im lambda <= 0.
GrResidual gr_residual(const SolutionField& field, cplx lambda, double t);

struct DeformationReport {
    double deviation = 0;
    double bound = 0;
    std::vector<double> R, tau;
    std::vector<FieldValue> values;
};

// Max pairwise deviation over R x tau; empty tau picks {t, (t + T)/2, T}. Requires x > 0.
DeformationReport deformation_check(const SolutionField& field, double x, double t,
                                    std::vector<double> R = {0, 0.5, 1}, std::vector<double> tau = {});

struct TraceReport {
    double gap = 0;
    double bound = 0;
    std::vector<double> t;
    std::vector<cplx> q, y;
};

// sup |q_U(0, t) - y_0(t)| over t_grid.
TraceReport boundary_trace_check(const SolutionField& field, const std::vector<double>& t_grid);

}  // namespace utm
