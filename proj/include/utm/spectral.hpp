#pragma once

#include <complex>
#include <stdexcept>
#include <vector>

namespace utm {

using cplx = std::complex<double>;

struct ClassError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// [d_t + a(-i d_x)^n] q = 0 on the half line with N boundary conditions.
struct EquationClass {
    int n;
    cplx a;
    int N;
};

struct Sector {
    double arg_lo, arg_hi;
};

struct ContourGeometry {
    EquationClass cls;
    std::vector<double> thetas;    // n - N angles, descending
    std::vector<Sector> sectors;   // N components of D_R
    double R;
};

EquationClass validate_class(int n, cplx a, int N);

// Angles with e^{i n theta} = -1/a in [-(2n-1)pi/2n, -pi/2n], sorted descending.
std::vector<double> enumerate_theta(const EquationClass& cls);

// Argument bounds of the sectors where Re(a lambda^n) < 0 in the upper half plane.
std::vector<Sector> sectors(const EquationClass& cls);

// Angle of the k-th sector bisector (k = 1..N); lambda = e^{i angle}(-i rho)^{1/n}
// sends the real rho line onto the boundary of that sector.
double sector_map_angle(const EquationClass& cls, int k);

ContourGeometry contour_geometry(const EquationClass& cls, double R = 1.0);

// c_j(lambda) = -a lambda^n / (i lambda)^{j+1}
cplx c_coeff(cplx lambda, int j, const EquationClass& cls);

cplx principal_root(cplx z, int n);

// lambda = e^{i theta} (-i rho)^{1/n}, principal root; rho on -i[0,inf) other than 0 is rejected.
cplx nth_root_map(cplx rho, double theta, int n);

}  // namespace utm
