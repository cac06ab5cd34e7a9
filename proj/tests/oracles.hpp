#pragma once

// Test-side oracles, independent of the library's own quadrature and
// integrators so agreement is evidence rather than tautology.

#include <Eigen/Core>
#include <cmath>
#include <functional>
#include <unsupported/Eigen/MatrixFunctions>

namespace oracles {

inline double simpson_panel(const std::function<double(double)>& f, double a,
                            double b) {
    return (b - a) / 6.0 * (f(a) + 4.0 * f(0.5 * (a + b)) + f(b));
}

inline double adaptive_simpson_rec(const std::function<double(double)>& f, double a,
                                   double b, double whole, double tol, int depth) {
    double m = 0.5 * (a + b);
    double left = simpson_panel(f, a, m);
    double right = simpson_panel(f, m, b);
    if (depth <= 0 || std::abs(left + right - whole) < 15.0 * tol)
        return left + right + (left + right - whole) / 15.0;
    return adaptive_simpson_rec(f, a, m, left, 0.5 * tol, depth - 1) +
           adaptive_simpson_rec(f, m, b, right, 0.5 * tol, depth - 1);
}

// Adaptive Simpson with Richardson correction; tol is an absolute target.
inline double adaptive_simpson(const std::function<double(double)>& f, double a,
                               double b, double tol = 1e-12) {
    return adaptive_simpson_rec(f, a, b, simpson_panel(f, a, b), tol, 40);
}

// exp(A t) x0 through Eigen's Pade-based matrix exponential.
inline Eigen::VectorXd matexp_flow(const Eigen::MatrixXd& a, double t,
                                   const Eigen::VectorXd& x0) {
    Eigen::MatrixXd e = (a * t).exp();
    return e * x0;
}

}  // namespace oracles
