#pragma once

#include <complex>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

namespace utm {

using cplx = std::complex<double>;

struct AlphaMismatch : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Exact rational p/q with q > 0, always reduced.
class Rational {
public:
    Rational(long num = 0, long den = 1);

    static Rational parse(const std::string& s);

    long num() const { return num_; }
    long den() const { return den_; }
    double value() const { return double(num_) / double(den_); }
    std::string str() const;

    friend Rational operator+(Rational a, Rational b);
    friend Rational operator-(Rational a, Rational b);
    friend Rational operator*(Rational a, Rational b);
    friend Rational operator/(Rational a, Rational b);
    friend bool operator==(Rational a, Rational b) { return a.num_ == b.num_ && a.den_ == b.den_; }
    friend bool operator<(Rational a, Rational b) { return a.num_ * b.den_ < b.num_ * a.den_; }

private:
    long num_, den_;
};

// t^{u alpha}, kept exact.
struct MonomialExponent {
    long u;
    Rational alpha;
    Rational value() const { return alpha * Rational(u); }
};

// sum_u Y_u t^{u alpha}
class FracPowerSeries {
public:
    FracPowerSeries(Rational alpha, std::vector<cplx> coeffs, std::optional<double> radius = {});

    static FracPowerSeries zero(Rational alpha, std::size_t len = 1);
    static FracPowerSeries constant(Rational alpha, cplx c);

    const Rational& alpha() const { return alpha_; }
    const std::vector<cplx>& coeffs() const { return coeffs_; }
    std::size_t size() const { return coeffs_.size(); }
    cplx operator[](std::size_t u) const { return u < coeffs_.size() ? coeffs_[u] : cplx(0); }
    MonomialExponent exponent(std::size_t u) const { return {long(u), alpha_}; }

    std::optional<double> radius() const { return radius_; }
    void set_radius(std::optional<double> r) { radius_ = r; }

    // Principal branch of t^{u alpha} for complex t.
    cplx eval(cplx t) const;
    cplx eval(double t) const;
    // d/dt of the series at t > 0.
    cplx derivative(double t) const;
    FracPowerSeries truncated(std::size_t len) const;
    bool is_zero() const;

private:
    Rational alpha_;
    std::vector<cplx> coeffs_;
    std::optional<double> radius_;
};

double gamma(double x);
cplx gamma(cplx z);

FracPowerSeries series_add(const FracPowerSeries& a, const FracPowerSeries& b);
FracPowerSeries series_scale(const FracPowerSeries& a, cplx c);
// Cauchy product, truncated to max_len terms (0 = full product).
FracPowerSeries series_mul(const FracPowerSeries& a, const FracPowerSeries& b, std::size_t max_len = 0);

// Termwise Caputo derivative of order alpha (equal to the series step).
FracPowerSeries caputo_series(const FracPowerSeries& y, Rational order);
// Termwise Riemann-Liouville integral of order k*alpha.
FracPowerSeries rl_integral_series(const FracPowerSeries& y, Rational order);

// L1 scheme on a uniform grid t_k = k h; returns D^alpha y at every grid point (0 at k = 0).
Eigen::VectorXcd caputo_l1_numeric(const Eigen::VectorXcd& samples, double h, double alpha);

std::vector<double> chebyshev_nodes(double a, double b, int m);

struct FitOptions {
    double cond_bound = 1e13;
};

struct FitResult {
    FracPowerSeries series;
    double residual;   // max abs residual on the samples
    double cond;       // 2-norm condition number of the column-scaled basis matrix
};

struct IllConditioned : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Least squares fit of samples in the basis t^{u alpha}, u = 0..U.
FitResult extract_coefficients(const std::vector<double>& t, const std::vector<cplx>& values,
                               Rational alpha, int U, const FitOptions& opt = {});

// Root-test estimate of the radius of convergence; diagnostic only.
std::optional<double> radius_estimate(const FracPowerSeries& s);

nlohmann::json to_json(const FracPowerSeries& s);
FracPowerSeries series_from_json(const nlohmann::json& j);
void write_series_csv(std::ostream& os, const FracPowerSeries& s);

}  // namespace utm
