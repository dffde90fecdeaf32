#pragma once

// Independent reference computations used only by tests. Nothing here calls
// into the library.

#include <cmath>
#include <stdexcept>

namespace oracle {

/// J_m(x) from its power series, summed until terms stop contributing.
inline double bessel_j(int m, double x)
{
    const double half = 0.5 * x;
    double term = 1.0;
    for (int i = 1; i <= m; ++i) term *= half / i;
    double sum = term;
    for (int k = 1; k < 200; ++k) {
        term *= -(half * half) / (static_cast<double>(k) * static_cast<double>(k + m));
        sum += term;
        if (std::abs(term) < 1e-18 * std::abs(sum)) break;
    }
    return sum;
}

/// k-th positive zero of J_m (k >= 1): scan for sign changes, then bisect.
inline double bessel_zero(int m, int k)
{
    const double step = 1e-2;
    double a = step;
    double fa = bessel_j(m, a);
    int found = 0;
    for (double b = a + step; b < 60.0; b += step) {
        const double fb = bessel_j(m, b);
        if ((fa < 0.0) != (fb < 0.0)) {
            if (++found == k) {
                double lo = a, hi = b, flo = fa;
                for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
                    const double mid = 0.5 * (lo + hi);
                    const double fm = bessel_j(m, mid);
                    if ((fm < 0.0) == (flo < 0.0)) {
                        lo = mid;
                        flo = fm;
                    } else {
                        hi = mid;
                    }
                }
                return 0.5 * (lo + hi);
            }
        }
        a = b;
        fa = fb;
    }
    throw std::runtime_error("bessel zero not bracketed");
}

/// Dirichlet disc eigenvalue j_{m,k}^2 / (2 R^2) for hbar = mass = 1.
inline double disc_eigenvalue(int m, int k, double R = 1.0)
{
    const double j = bessel_zero(m, k);
    return 0.5 * j * j / (R * R);
}

struct Curvatures {
    double H;
    double K;
};

/// Mean and Gaussian curvature of z = S(rho) from central differences of S
/// and the surface-of-revolution formulas, evaluated independently of the
/// library's profile machinery.
template <class Height>
Curvatures fd_curvatures(Height S, double rho, double h)
{
    // fourth-order five-point stencils
    const double m2 = S(rho - 2.0 * h), m1 = S(rho - h), c = S(rho), p1 = S(rho + h), p2 = S(rho + 2.0 * h);
    const double s1 = (m2 - 8.0 * m1 + 8.0 * p1 - p2) / (12.0 * h);
    const double s2 = (-m2 + 16.0 * m1 - 30.0 * c + 16.0 * p1 - p2) / (12.0 * h * h);
    const double Z = std::sqrt(1.0 + s1 * s1);
    return {-0.5 * (s1 / (Z * rho) + s2 / (Z * Z * Z)), s1 * s2 / (rho * Z * Z * Z * Z)};
}

}  // namespace oracle
