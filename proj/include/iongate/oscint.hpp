#pragma once

#include <complex>
#include <vector>

#include "iongate/errors.hpp"

namespace iongate {

using Complex = std::complex<double>;

/// Motional phase phi(t) = phi0 + sum_l phi_l cos(l w_rf t).
struct PhaseSpec {
    double phi0 = 0.0;
    std::vector<double> harmonics;  // phi^(l), l = 1..L

    int order() const { return static_cast<int>(harmonics.size()); }
};

/// Sideband amplitudes of a carrier at the mode frequency:
/// f(t) = sum_n coeff(n) exp(i (omega + n w_rf) t), n in [-ncut, ncut].
struct ModulationSpec {
    double omega = 0.0;
    std::vector<double> c;  // c[n + ncut]

    int ncut() const { return (static_cast<int>(c.size()) - 1) / 2; }
    double coeff(int n) const { return c[n + ncut()]; }
};

/// Tolerance and cutoff knobs of the series expansion, plus a hard cap on
/// closed-form leaf evaluations per call.
struct SeriesBudget {
    double eps = 1e-8;
    int n_max = 20;
    long max_terms = 10'000'000;
};

struct IntegralResult {
    Complex value{0.0, 0.0};
    double dropped_bound = 0.0;  // upper estimate of everything pruned
    long terms = 0;              // closed-form leaves evaluated

    IntegralResult& operator+=(const IntegralResult& o) {
        value += o.value;
        dropped_bound += o.dropped_bound;
        terms += o.terms;
        return *this;
    }
};

/// Bessel function of the first kind, integer order.
double bessel_j(int n, double x);
/// J_0..J_nmax at fixed argument (downward recurrence).
std::vector<double> bessel_j_table(int n_max, double x);

/// Closed form of int_{t1}^{t2} exp(i (mu + omega) t) dt; exact in the
/// resonant limit mu + omega -> 0.
Complex exp_integral_single(double t1, double t2, double mu, double omega);

/// Ordered double integrals
///   int_{t1}^{t2} dt int_{t1}^{t} dt' e^{i mu t} e^{+- i mu t'} e^{i w1 t} e^{-i w2 t'},
/// with all resonant denominators handled by series limits.
Complex exp_integral_double_plus(double t1, double t2, double mu, double w1, double w2);
Complex exp_integral_double_minus(double t1, double t2, double mu, double w1, double w2);

/// int_{t1}^{t2} sin(mu t + phi(t)) e^{i omega t} dt via the Bessel-series
/// expansion of the cosine-modulated phase.
IntegralResult single_integral(double t1, double t2, double mu, double omega,
                               double omega_rf, const PhaseSpec& phase,
                               const SeriesBudget& budget);

/// sum_n c_n * single_integral(..., omega = mod.omega + n w_rf, ...).
IntegralResult modulated_single_integral(double t1, double t2, double mu,
                                         const ModulationSpec& mod, double omega_rf,
                                         const PhaseSpec& phase,
                                         const SeriesBudget& budget);

/// Ordered double integral of sin(mu t1 + phi_a(t1)) sin(mu t2 + phi_b(t2))
/// e^{i w1 t1} e^{-i w2 t2} over t1 in [t1,t2], t2 in [t1,t1_current].
IntegralResult double_integral(double t1, double t2, double mu, double w1, double w2,
                               double omega_rf, const PhaseSpec& phase_a,
                               const PhaseSpec& phase_b, const SeriesBudget& budget);

}  // namespace iongate
