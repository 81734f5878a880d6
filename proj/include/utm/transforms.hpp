#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "utm/fraccalc.hpp"
#include "utm/quad.hpp"
#include "utm/spectral.hpp"

namespace utm {

struct QuadratureConfig {
    double abs_tol = 1e-8;
    double rel_tol = 1e-6;
    double rho_max = 0;          // 0: chosen from the tail bound
    double R_arc = 1e-3;         // detour radius of the rho contour above 0
    int asymptotic_terms = 0;    // 0: 4n+1, capped by the available q0 derivatives
    double panel_ratio = 2.0;    // geometric growth of panels away from 0
    double panel_scale = 1.0;    // multiplies the widest panel on oscillatory legs
    int max_panels = 4000;       // per adaptive integral
};

struct InitialDatum {
    std::function<cplx(double)> q0;
    std::vector<cplx> derivs;    // q0^{(j)}(0), j = 0, 1, ...
    double decay_scale = 1;
    // Exponential decay rate of q0 (infinite for Gaussian tails); q0_hat accepts Im lambda below it.
    double decay_rate = 0;
    bool zero = false;
    std::string name;

    // Point beyond which |q0| and |q0'| stay below 1e-2 * abs_tol.
    double cutoff(double abs_tol) const;

    static InitialDatum zero_datum();
    // (sum_m p_m x^m) e^{-kappa x}
    static InitialDatum exp_poly(std::vector<cplx> poly, double kappa, int nderivs = 40);
    // (sum_m p_m x^m) e^{-((x - center)/width)^2}
    static InitialDatum gaussian(std::vector<cplx> poly, double center, double width, int nderivs = 40);
};

// Half-line Fourier transform int_0^inf e^{-i lambda x} q0(x) dx.
class Q0Hat {
public:
    Q0Hat(InitialDatum datum, const QuadratureConfig& cfg);
    Estimate operator()(cplx lambda) const;
    double x_max() const { return xmax_; }

private:
    InitialDatum d_;
    QuadratureConfig cfg_;
    double xmax_ = 0, tail_ = 0, l1_ = 0;
};

Estimate q0_hat(const InitialDatum& datum, cplx lambda, const QuadratureConfig& cfg = {});

// F[phi](mu; t) = int_0^t e^{mu s} phi(s) ds for a fractional power series phi.
// For |mu| t above the switchover the integral is split exactly as
// F = L(mu) + e^{mu t} H(mu), with L the integral along 0 -> -inf/mu in closed form
// and H = (1/mu) int_0^inf e^{-w} phi(t - w/mu) dw.
class FTransform {
public:
    static constexpr double switchover = 30;

    FTransform(const FracPowerSeries& phi, double t, int panels = 12);

    Estimate operator()(cplx mu) const;
    Estimate direct(cplx mu) const;
    cplx leading(cplx mu) const;
    Estimate endpoint(cplx mu) const;

    double t() const { return t_; }
    const FracPowerSeries& series() const { return phi_; }

private:
    FracPowerSeries phi_;
    double t_;
    std::vector<double> e_;      // t w_i^q
    std::vector<cplx> g_;        // phi(t w^q) q t w^{q-1} times Kronrod weight
    std::vector<cplx> gg_;       // same with the embedded Gauss weight
};

// F[phi](lambda; t) with mu = a lambda^n; rejects Re mu > 0 unless allow_growth.
Estimate f_transform(const FracPowerSeries& phi, cplx lambda, double t, const EquationClass& cls,
                     bool allow_growth = false);
Estimate f_transform(const std::function<cplx(double)>& phi, cplx lambda, double t,
                     const EquationClass& cls, const QuadratureConfig& cfg = {}, bool allow_growth = false);

// Bracket(rho) = sum_k w_k q0_hat(e^{i theta_k} s) - sum_j d_j s^{-(j+1)}, s = (-i rho)^{1/n};
// the sampled function is prefactor/(2 pi) int_Gamma e^{-i rho t} Bracket(rho) d rho.
struct BracketSpec {
    int n = 2;
    std::vector<double> thetas;
    std::vector<cplx> weights;
    std::vector<cplx> d;
    cplx prefactor = 1;
};

struct GSamples {
    std::vector<double> t;
    std::vector<cplx> g;
    std::vector<double> err;
    double rho_max = 0;
    int asymptotic_terms = 0;
};

GSamples invert_bracket(const BracketSpec& spec, const InitialDatum& datum, const std::vector<double>& t,
                        double T, const QuadratureConfig& cfg = {});

enum class ProblemKind { heat, ls, lkdv1, lkdv2 };

struct GDatumOptions {
    std::function<cplx(double)> h;   // LS boundary datum
    cplx b0 = 0;                     // b(0), enters the LKdV2 bracket
    bool heat_plus_q0_sign = false;  // heat bracket with +q0(0)/sqrt(-i rho)
};

BracketSpec bracket_spec(ProblemKind kind, const InitialDatum& datum, const GDatumOptions& opt = {});

GSamples g_datum(ProblemKind kind, const InitialDatum& datum, const std::vector<double>& t, double T,
                 const QuadratureConfig& cfg = {}, const GDatumOptions& opt = {});

void write_g_csv(std::ostream& os, const GSamples& g);

struct RemoveqTResult {
    cplx value;
    double bound;      // truncation bound plus quadrature error
    double rho_max;
};

// int_R e^{i rho delta} phi_hat(e^{i theta}(-i rho)^{1/n}) d rho, which vanishes for admissible theta.
// subtract_terms < 0 picks the default count; 0 integrates the raw transform.
RemoveqTResult removeqT_check(const InitialDatum& phi, double theta, int n, double delta,
                              const QuadratureConfig& cfg = {}, int subtract_terms = -1);

}  // namespace utm
