#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "utm/spectral.hpp"

namespace oracle {

using utm::cplx;
using utm::EquationClass;

// Admissible classes with 2 <= n <= nmax, sampling several phases for even n.
inline std::vector<EquationClass> sample_classes(int nmax) {
    using std::numbers::pi;
    std::vector<EquationClass> out;
    for (int n = 2; n <= nmax; ++n) {
        if (n % 2 == 0) {
            for (double ph : {0.0, pi / 6, -pi / 6, pi / 3, -pi / 4, pi / 2, -pi / 2})
                out.push_back(utm::validate_class(n, std::polar(1.0, ph), n / 2));
        } else {
            out.push_back(utm::validate_class(n, cplx(0, 1), (n + 1) / 2));
            out.push_back(utm::validate_class(n, cplx(0, -1), (n - 1) / 2));
        }
    }
    return out;
}

// Scan every root of e^{i n theta} = -1/a and keep those inside the lower window.
inline std::vector<double> brute_force_theta(const EquationClass& cls) {
    using std::numbers::pi;
    const int n = cls.n;
    const double base = (pi - std::arg(cls.a)) / n;
    const double lo = -(2 * n - 1) * pi / (2 * n), hi = -pi / (2 * n);
    std::vector<double> out;
    for (int m = -3 * n; m <= 3 * n; ++m) {
        double t = base + 2 * pi * m / n;
        if (t >= lo - 1e-12 && t <= hi + 1e-12) out.push_back(t);
    }
    std::sort(out.rbegin(), out.rend());
    return out;
}

}  // namespace oracle
