// Independent reference implementations used only by the test suites:
// adaptive quadrature, Floquet monodromy, power-series Bessel, finite
// differences and brute-force ODE integration.  Nothing here shares code
// with the library paths it checks.
#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <stdexcept>

#include <Eigen/Dense>

namespace oracle {

using Complex = std::complex<double>;

// ---------------------------------------------------------------------
// adaptive Simpson quadrature for complex integrands
inline Complex simpson_recurse(const std::function<Complex(double)>& f, double a, double b,
                               Complex fa, Complex fm, Complex fb, Complex whole,
                               double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const Complex flm = f(lm);
    const Complex frm = f(rm);
    const Complex left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const Complex right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const Complex delta = left + right - whole;
    if (depth <= 0) throw std::runtime_error("quadrature oracle: depth exhausted");
    if (std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
    return simpson_recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           simpson_recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

inline Complex integrate(const std::function<Complex(double)>& f, double a, double b,
                         double tol = 1e-12, int pieces = 24) {
    // split into pieces first so oscillations cannot fool the error estimate
    Complex total{0.0, 0.0};
    for (int p = 0; p < pieces; ++p) {
        const double x0 = a + (b - a) * p / pieces;
        const double x1 = a + (b - a) * (p + 1) / pieces;
        const double m = 0.5 * (x0 + x1);
        const Complex fa = f(x0), fm = f(m), fb = f(x1);
        const Complex whole = (x1 - x0) / 6.0 * (fa + 4.0 * fm + fb);
        total += simpson_recurse(f, x0, x1, fa, fm, fb, whole, tol / pieces, 48);
    }
    return total;
}

// ordered double integral: t outer in [a,b], t' inner in [a,t]
inline Complex integrate2_ordered(const std::function<Complex(double, double)>& f, double a,
                                  double b, double tol = 1e-10) {
    auto outer = [&](double t) {
        return integrate([&](double tp) { return f(t, tp); }, a, t,
                         tol / (4.0 * std::max(1.0, b - a)), 12);
    };
    return integrate(outer, a, b, tol, 24);
}

// ---------------------------------------------------------------------
// power-series Bessel J_n, 30 terms
inline double bessel_series(int n, double x) {
    long double sum = 0.0L;
    long double term = 1.0L;
    for (int k = 1; k <= n; ++k) term *= static_cast<long double>(x) / 2.0L / k;
    const long double q = static_cast<long double>(x) * x / 4.0L;
    long double factor = term;
    for (int k = 0; k < 30; ++k) {
        sum += factor;
        factor *= -q / ((k + 1.0L) * (n + k + 1.0L));
    }
    return static_cast<double>(sum);
}

// ---------------------------------------------------------------------
// RK4 integration of a generic first-order system
template <typename State, typename Rhs>
State rk4(State y, double t0, double t1, int steps, Rhs&& rhs) {
    const double h = (t1 - t0) / steps;
    double t = t0;
    for (int s = 0; s < steps; ++s) {
        const State k1 = rhs(t, y);
        const State k2 = rhs(t + 0.5 * h, y + 0.5 * h * k1);
        const State k3 = rhs(t + 0.5 * h, y + 0.5 * h * k2);
        const State k4 = rhs(t + h, y + h * k3);
        y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        t = t0 + (s + 1) * h;
    }
    return y;
}

// monodromy matrix of x'' + (a - 2 q cos 2t) x = 0 over one pi period
inline Eigen::Matrix2d mathieu_monodromy(double a, double q, int steps = 40000) {
    using M = Eigen::Matrix2d;
    M y = M::Identity();
    auto rhs = [&](double t, const M& m) {
        M d;
        d.row(0) = m.row(1);
        d.row(1) = -(a - 2.0 * q * std::cos(2.0 * t)) * m.row(0);
        return d;
    };
    return rk4(y, 0.0, 3.14159265358979323846, steps, rhs);
}

// Floquet exponent beta in [0, 1]: trace M = 2 cos(pi beta)
inline double mathieu_exponent(double a, double q) {
    const double tr = mathieu_monodromy(a, q).trace();
    if (std::abs(tr) > 2.0) throw std::runtime_error("mathieu oracle: unstable parameters");
    return std::acos(0.5 * tr) / 3.14159265358979323846;
}

// central finite-difference gradient
template <typename F>
Eigen::VectorXd gradient_fd(F&& f, const Eigen::VectorXd& x, double h = 1e-6) {
    Eigen::VectorXd g(x.size());
    for (int i = 0; i < x.size(); ++i) {
        Eigen::VectorXd xp = x, xm = x;
        xp[i] += h;
        xm[i] -= h;
        g[i] = (f(xp) - f(xm)) / (2.0 * h);
    }
    return g;
}

}  // namespace oracle
