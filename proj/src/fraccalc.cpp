#include "utm/fraccalc.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <ostream>
#include <sstream>

namespace utm {

namespace {

constexpr double kPi = std::numbers::pi;

// Godfrey's g = 607/128, 15-term Lanczos coefficients.
constexpr double kLanczosG = 607.0 / 128.0;
constexpr double kLanczos[15] = {
    0.99999999999999709182,     57.156235665862923517,      -59.597960355475491248,
    14.136097974741747174,      -0.49191381609762019978,    .33994649984811888699e-4,
    .46523628927048575665e-4,   -.98374475304879564677e-4,  .15808870322491248884e-3,
    -.21026444172410488319e-3,  .21743961811521264320e-3,   -.16431810653676389022e-3,
    .84418223983852743293e-4,   -.26190838401581408670e-4,  .36899182659531622704e-5};

template <class T>
T lanczos_gamma(T z) {
    // Gamma(z) for Re z >= 1/2
    z -= 1.0;
    T acc = kLanczos[0];
    for (int k = 1; k < 15; ++k) acc += kLanczos[k] / (z + double(k));
    T t = z + kLanczosG + 0.5;
    return std::sqrt(2.0 * kPi) * std::exp((z + 0.5) * std::log(t) - t) * acc;
}

void require_same_alpha(const FracPowerSeries& a, const FracPowerSeries& b) {
    if (!(a.alpha() == b.alpha()))
        throw AlphaMismatch("series alpha mismatch: " + a.alpha().str() + " vs " + b.alpha().str());
}

}  // namespace

Rational::Rational(long num, long den) {
    if (den == 0) throw std::invalid_argument("rational with zero denominator");
    if (den < 0) num = -num, den = -den;
    long g = std::gcd(num < 0 ? -num : num, den);
    if (g == 0) g = 1;
    num_ = num / g;
    den_ = den / g;
}

Rational Rational::parse(const std::string& s) {
    auto slash = s.find('/');
    try {
        if (slash == std::string::npos) return Rational(std::stol(s));
        return Rational(std::stol(s.substr(0, slash)), std::stol(s.substr(slash + 1)));
    } catch (const std::logic_error&) {
        throw std::invalid_argument("cannot parse rational '" + s + "'");
    }
}

std::string Rational::str() const {
    return den_ == 1 ? std::to_string(num_) : std::to_string(num_) + "/" + std::to_string(den_);
}

Rational operator+(Rational a, Rational b) { return {a.num_ * b.den_ + b.num_ * a.den_, a.den_ * b.den_}; }
Rational operator-(Rational a, Rational b) { return {a.num_ * b.den_ - b.num_ * a.den_, a.den_ * b.den_}; }
Rational operator*(Rational a, Rational b) { return {a.num_ * b.num_, a.den_ * b.den_}; }
Rational operator/(Rational a, Rational b) { return {a.num_ * b.den_, a.den_ * b.num_}; }

FracPowerSeries::FracPowerSeries(Rational alpha, std::vector<cplx> coeffs, std::optional<double> radius)
    : alpha_(alpha), coeffs_(std::move(coeffs)), radius_(radius) {
    if (alpha_.num() <= 0 || alpha_.num() > alpha_.den())
        throw std::invalid_argument("series alpha must lie in (0,1], got " + alpha_.str());
    if (coeffs_.empty()) throw std::invalid_argument("series needs at least one coefficient");
}

FracPowerSeries FracPowerSeries::zero(Rational alpha, std::size_t len) {
    return FracPowerSeries(alpha, std::vector<cplx>(std::max<std::size_t>(len, 1), 0.0));
}

FracPowerSeries FracPowerSeries::constant(Rational alpha, cplx c) { return FracPowerSeries(alpha, {c}); }

cplx FracPowerSeries::eval(cplx t) const {
    if (t == 0.0) return coeffs_[0];
    // Horner in t^alpha
    cplx ta = std::pow(t, alpha_.value());
    cplx acc = 0;
    for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * ta + *it;
    return acc;
}

cplx FracPowerSeries::eval(double t) const {
    if (t < 0) throw std::domain_error("series evaluated at negative time");
    if (t == 0) return coeffs_[0];
    double ta = std::pow(t, alpha_.value());
    cplx acc = 0;
    for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * ta + *it;
    return acc;
}

cplx FracPowerSeries::derivative(double t) const {
    double a = alpha_.value();
    cplx acc = 0;
    for (std::size_t u = 1; u < coeffs_.size(); ++u) acc += coeffs_[u] * (double(u) * a) * std::pow(t, u * a - 1.0);
    return acc;
}

FracPowerSeries FracPowerSeries::truncated(std::size_t len) const {
    std::vector<cplx> c(coeffs_.begin(), coeffs_.begin() + std::min(len, coeffs_.size()));
    if (c.empty()) c.push_back(0.0);
    return FracPowerSeries(alpha_, std::move(c), radius_);
}

bool FracPowerSeries::is_zero() const {
    return std::all_of(coeffs_.begin(), coeffs_.end(), [](cplx c) { return c == 0.0; });
}

double gamma(double x) {
    if (!(x > 0)) throw std::domain_error("gamma: argument must be positive");
    if (x < 0.5) return kPi / (std::sin(kPi * x) * lanczos_gamma(1.0 - x));
    return lanczos_gamma(x);
}

cplx gamma(cplx z) {
    if (!(z.real() > 0)) throw std::domain_error("gamma: Re z must be positive");
    if (z.imag() == 0) return gamma(z.real());
    if (z.real() < 0.5) return kPi / (std::sin(kPi * z) * lanczos_gamma(1.0 - z));
    return lanczos_gamma(z);
}

FracPowerSeries series_add(const FracPowerSeries& a, const FracPowerSeries& b) {
    require_same_alpha(a, b);
    std::vector<cplx> c(std::max(a.size(), b.size()));
    for (std::size_t u = 0; u < c.size(); ++u) c[u] = a[u] + b[u];
    return FracPowerSeries(a.alpha(), std::move(c));
}

FracPowerSeries series_scale(const FracPowerSeries& a, cplx s) {
    std::vector<cplx> c(a.coeffs());
    for (auto& v : c) v *= s;
    return FracPowerSeries(a.alpha(), std::move(c), a.radius());
}

FracPowerSeries series_mul(const FracPowerSeries& a, const FracPowerSeries& b, std::size_t max_len) {
    require_same_alpha(a, b);
    std::size_t len = a.size() + b.size() - 1;
    if (max_len > 0) len = std::min(len, max_len);
    std::vector<cplx> c(len, 0.0);
    for (std::size_t u = 0; u < len; ++u)
        for (std::size_t v = 0; v <= u; ++v) c[u] += a[v] * b[u - v];
    return FracPowerSeries(a.alpha(), std::move(c));
}

FracPowerSeries caputo_series(const FracPowerSeries& y, Rational order) {
    if (!(order == y.alpha()))
        throw AlphaMismatch("caputo_series: order " + order.str() + " differs from series step " + y.alpha().str());
    double a = y.alpha().value();
    if (y.size() == 1) return FracPowerSeries::zero(y.alpha());
    std::vector<cplx> c(y.size() - 1);
    for (std::size_t u = 1; u < y.size(); ++u)
        c[u - 1] = y[u] * (gamma(u * a + 1.0) / gamma((u - 1) * a + 1.0));
    return FracPowerSeries(y.alpha(), std::move(c));
}

FracPowerSeries rl_integral_series(const FracPowerSeries& y, Rational order) {
    Rational k = order / y.alpha();
    if (k.den() != 1 || k.num() < 1)
        throw AlphaMismatch("rl_integral_series: order " + order.str() + " is not a positive multiple of " +
                            y.alpha().str());
    double a = y.alpha().value(), o = order.value();
    std::vector<cplx> c(y.size() + std::size_t(k.num()), 0.0);
    for (std::size_t u = 0; u < y.size(); ++u)
        c[u + k.num()] = y[u] * (gamma(u * a + 1.0) / gamma(u * a + o + 1.0));
    return FracPowerSeries(y.alpha(), std::move(c));
}

Eigen::VectorXcd caputo_l1_numeric(const Eigen::VectorXcd& y, double h, double alpha) {
    if (!(alpha > 0 && alpha < 1)) throw std::domain_error("caputo_l1_numeric: order must lie in (0,1)");
    if (!(h > 0)) throw std::domain_error("caputo_l1_numeric: grid spacing must be positive");
    const Eigen::Index n = y.size();
    Eigen::VectorXd b(std::max<Eigen::Index>(n, 1));
    for (Eigen::Index j = 0; j < b.size(); ++j) b[j] = std::pow(j + 1.0, 1 - alpha) - std::pow(double(j), 1 - alpha);
    Eigen::VectorXcd dy(std::max<Eigen::Index>(n - 1, 0));
    for (Eigen::Index j = 0; j + 1 < n; ++j) dy[j] = y[j + 1] - y[j];
    Eigen::VectorXcd out = Eigen::VectorXcd::Zero(n);
    const double scale = 1.0 / (gamma(2 - alpha) * std::pow(h, alpha));
    for (Eigen::Index k = 1; k < n; ++k) {
        cplx acc = 0;
        for (Eigen::Index j = 0; j < k; ++j) acc += b[j] * dy[k - 1 - j];
        out[k] = scale * acc;
    }
    return out;
}

std::vector<double> chebyshev_nodes(double a, double b, int m) {
    std::vector<double> t(m);
    for (int i = 0; i < m; ++i) {
        double c = std::cos(kPi * (2 * i + 1) / (2.0 * m));
        t[i] = 0.5 * (a + b) - 0.5 * (b - a) * c;
    }
    return t;
}

FitResult extract_coefficients(const std::vector<double>& t, const std::vector<cplx>& values, Rational alpha,
                               int U, const FitOptions& opt) {
    if (t.size() != values.size()) throw std::invalid_argument("extract_coefficients: size mismatch");
    if (U < 0 || t.size() < std::size_t(U + 1))
        throw std::invalid_argument("extract_coefficients: need at least U+1 samples");
    double tmax = 0;
    for (double ti : t) {
        if (!(ti > 0)) throw std::invalid_argument("extract_coefficients: sample times must be positive");
        tmax = std::max(tmax, ti);
    }
    const double a = alpha.value();
    const Eigen::Index m = Eigen::Index(t.size());
    Eigen::MatrixXd A(m, U + 1);
    Eigen::MatrixXd rhs(m, 2);
    for (Eigen::Index i = 0; i < m; ++i) {
        double s = std::pow(t[i] / tmax, a);
        double p = 1;
        for (int u = 0; u <= U; ++u, p *= s) A(i, u) = p;
        rhs(i, 0) = values[i].real();
        rhs(i, 1) = values[i].imag();
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(A);
    const auto& sv = svd.singularValues();
    double cond = sv[sv.size() - 1] > 0 ? sv[0] / sv[sv.size() - 1] : INFINITY;
    if (!(cond <= opt.cond_bound)) {
        std::ostringstream os;
        os << "extract_coefficients: scaled condition estimate " << cond << " exceeds bound " << opt.cond_bound
           << " (U=" << U << ", alpha=" << alpha.str() << ")";
        throw IllConditioned(os.str());
    }
    Eigen::MatrixXd x = A.householderQr().solve(rhs);
    Eigen::MatrixXd r = A * x - rhs;
    double res = 0;
    for (Eigen::Index i = 0; i < m; ++i) res = std::max(res, std::hypot(r(i, 0), r(i, 1)));
    std::vector<cplx> c(U + 1);
    for (int u = 0; u <= U; ++u) c[u] = cplx(x(u, 0), x(u, 1)) / std::pow(tmax, u * a);
    return {FracPowerSeries(alpha, std::move(c)), res, cond};
}

std::optional<double> radius_estimate(const FracPowerSeries& s) {
    const double a = s.alpha().value();
    for (std::size_t u = s.size(); u-- > std::max<std::size_t>(1, s.size() / 2);) {
        double m = std::abs(s[u]);
        if (m > 0) return std::pow(m, -1.0 / (u * a));
    }
    return std::nullopt;
}

nlohmann::json to_json(const FracPowerSeries& s) {
    nlohmann::json j;
    j["alpha"] = s.alpha().str();
    auto arr = nlohmann::json::array();
    for (auto c : s.coeffs()) arr.push_back({c.real(), c.imag()});
    j["coeffs"] = arr;
    j["radius"] = s.radius() ? nlohmann::json(*s.radius()) : nlohmann::json(nullptr);
    return j;
}

FracPowerSeries series_from_json(const nlohmann::json& j) {
    Rational alpha = Rational::parse(j.at("alpha").get<std::string>());
    std::vector<cplx> c;
    for (const auto& e : j.at("coeffs")) {
        if (e.is_array()) c.emplace_back(e.at(0).get<double>(), e.size() > 1 ? e.at(1).get<double>() : 0.0);
        else c.emplace_back(e.get<double>(), 0.0);
    }
    std::optional<double> r;
    if (j.contains("radius") && !j["radius"].is_null()) r = j["radius"].get<double>();
    return FracPowerSeries(alpha, std::move(c), r);
}

void write_series_csv(std::ostream& os, const FracPowerSeries& s) {
    os << "u,exponent,re,im\n";
    os.precision(17);
    for (std::size_t u = 0; u < s.size(); ++u)
        os << u << ',' << s.exponent(u).value().str() << ',' << s[u].real() << ',' << s[u].imag() << '\n';
}

}  // namespace utm
