#include "utm/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace utm {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kUnitTol = 1e-14;
}  // namespace

EquationClass validate_class(int n, cplx a, int N) {
    if (n < 2) throw ClassError("order n must be at least 2, got " + std::to_string(n));
    if (std::abs(std::abs(a) - 1.0) > kUnitTol) throw ClassError("coefficient a must have unit modulus");
    if (n % 2 == 0) {
        if (a.real() < -kUnitTol) throw ClassError("n even requires Re(a) >= 0");
        if (N != n / 2) throw ClassError("n even requires N = n/2 = " + std::to_string(n / 2));
    } else {
        if (std::abs(a.real()) > kUnitTol) throw ClassError("n odd requires Re(a) = 0");
        int expect = a.imag() > 0 ? (n + 1) / 2 : (n - 1) / 2;
        if (N != expect)
            throw ClassError(std::string("n odd with a = ") + (a.imag() > 0 ? "i" : "-i") + " requires N = " +
                             std::to_string(expect));
    }
    return {n, a, N};
}

std::vector<double> enumerate_theta(const EquationClass& cls) {
    const int n = cls.n, N = cls.N;
    std::vector<double> th;
    if (n % 2 == 1) {
        if (cls.a.imag() < 0)
            for (int r = 0; r <= n - N - 1; ++r) th.push_back(-kPi * (4 * r + 1) / (2.0 * n));
        else
            for (int r = 1; r <= n - N; ++r) th.push_back(-kPi * (4 * r - 1) / (2.0 * n));
    } else {
        double phi = std::arg(cls.a);
        double shift = 2 * (kPi + phi) / kPi;
        for (int r = 0; r <= n - N - 1; ++r) th.push_back(-kPi * (4 * r + shift) / (2.0 * n));
    }
    std::sort(th.begin(), th.end(), std::greater<>());
    return th;
}

std::vector<Sector> sectors(const EquationClass& cls) {
    std::vector<Sector> s;
    double phi = std::arg(cls.a);
    for (int k = 1; k <= cls.N; ++k)
        s.push_back({(kPi * (4 * k - 3) / 2 - phi) / cls.n, (kPi * (4 * k - 1) / 2 - phi) / cls.n});
    return s;
}

double sector_map_angle(const EquationClass& cls, int k) {
    return (kPi * (2 * k - 1) - std::arg(cls.a)) / cls.n;
}

ContourGeometry contour_geometry(const EquationClass& cls, double R) {
    if (R < 0) throw std::invalid_argument("contour radius R must be nonnegative");
    return {cls, enumerate_theta(cls), sectors(cls), R};
}

cplx c_coeff(cplx lambda, int j, const EquationClass& cls) {
    if (lambda == 0.0) {
        if (j + 1 >= cls.n) throw std::domain_error("c_j has a pole at lambda = 0");
        return 0.0;
    }
    const cplx I(0, 1);
    return -cls.a * std::pow(lambda, cls.n) / std::pow(I * lambda, j + 1);
}

cplx principal_root(cplx z, int n) {
    if (z == 0.0) return 0.0;
    return std::polar(std::pow(std::abs(z), 1.0 / n), std::arg(z) / n);
}

cplx nth_root_map(cplx rho, double theta, int n) {
    if (rho == 0.0) return 0.0;
    if (rho.imag() < 0 && std::abs(rho.real()) <= 1e-15 * std::abs(rho))
        throw std::domain_error("rho lies on the branch cut -i[0,inf)");
    const cplx I(0, 1);
    return std::polar(1.0, theta) * principal_root(-I * rho, n);
}

}  // namespace utm
