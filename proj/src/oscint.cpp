#include "iongate/oscint.hpp"

#include <algorithm>
#include <cmath>

namespace iongate {

namespace {

constexpr Complex I{0.0, 1.0};

double sinc(double x) {
    if (std::abs(x) < 1e-8) return 1.0 - x * x / 6.0;
    return std::sin(x) / x;
}

// i^n without trig
Complex i_pow(int n) {
    switch (((n % 4) + 4) % 4) {
        case 0: return {1.0, 0.0};
        case 1: return {0.0, 1.0};
        case 2: return {-1.0, 0.0};
        default: return {0.0, -1.0};
    }
}

// l1 mass of the Jacobi-Anger coefficients of exp(i phi cos),
// sum_n (2 - delta_n0)|J_n(phi)| <= 2 exp(|phi|/2) - 1.
double coefficient_mass(double phi) { return 2.0 * std::exp(0.5 * std::abs(phi)) - 1.0; }

}  // namespace

std::vector<double> bessel_j_table(int n_max, double x) {
    std::vector<double> j(n_max + 1, 0.0);
    const double ax = std::abs(x);
    if (ax < 1e-12) {
        j[0] = 1.0;
        if (n_max >= 1) j[1] = x / 2.0;
        return j;
    }
    // downward recurrence, normalized by J_0 + 2 J_2 + 2 J_4 + ... = 1
    int start = static_cast<int>(std::max<double>(n_max, ax)) + 24;
    if (start % 2) ++start;
    double fp = 0.0;          // f_{k+1}
    double fc = 1e-300;       // f_k
    double norm = 0.0;
    for (int k = start; k >= 1; --k) {
        const double fm = (2.0 * k / x) * fc - fp;
        fp = fc;
        fc = fm;
        if (k - 1 <= n_max) j[k - 1] = fc;
        if ((k - 1) % 2 == 0) norm += (k - 1 == 0 ? 1.0 : 2.0) * fc;
        if (std::abs(fc) > 1e280) {  // rescale to avoid overflow
            fc *= 1e-280;
            fp *= 1e-280;
            norm *= 1e-280;
            for (auto& v : j) v *= 1e-280;
        }
    }
    for (auto& v : j) v /= norm;
    return j;
}

double bessel_j(int n, double x) {
    if (n < 0) throw ConfigError("bessel_j needs n >= 0");
    if (x < 0.0) return (n % 2 ? -1.0 : 1.0) * bessel_j(n, -x);
    return bessel_j_table(n, x)[n];
}

Complex exp_integral_single(double t1, double t2, double mu, double omega) {
    const double w = mu + omega;
    const double dt = t2 - t1;
    return dt * std::exp(I * (w * 0.5 * (t1 + t2))) * sinc(0.5 * w * dt);
}

namespace {

// g_k(z) = int_0^1 u^k e^{z u} du, all orders 0..k_max at once.  Upward
// recurrence when |z| dominates, otherwise downward with a contracted
// zero seed.
std::vector<Complex> g_moments(Complex z, int k_max) {
    std::vector<Complex> g(k_max + 1);
    const double az = std::abs(z);
    const Complex ez = std::exp(z);
    if (az < 1e-8) {
        for (int k = 0; k <= k_max; ++k) {
            Complex term{1.0, 0.0};
            Complex sum{0.0, 0.0};
            for (int jj = 0; jj < 6; ++jj) {
                sum += term / static_cast<double>(k + jj + 1);
                term *= z / static_cast<double>(jj + 1);
            }
            g[k] = sum;
        }
        return g;
    }
    if (az >= k_max + 8) {
        g[0] = (ez - 1.0) / z;
        for (int k = 1; k <= k_max; ++k) g[k] = (ez - static_cast<double>(k) * g[k - 1]) / z;
        return g;
    }
    // downward sweep contracts the error of the zero seed by |z|/k per step
    const int start = k_max + static_cast<int>(az) + 60;
    Complex gk{0.0, 0.0};
    for (int k = start; k >= 1; --k) {
        const Complex gm = (ez - z * gk) / static_cast<double>(k);
        if (k - 1 <= k_max) g[k - 1] = gm;
        gk = gm;
    }
    return g;
}

// core(a, b, dt) = int_0^dt e^{i a s} (e^{i b s} - 1) / (i b) ds
Complex double_core(double a, double b, double dt) {
    auto f = [&](double w) { return dt * std::exp(I * (0.5 * w * dt)) * sinc(0.5 * w * dt); };
    if (std::abs(b * dt) >= 0.5) return (f(a + b) - f(a)) / (I * b);
    // series in b: sum_k (i b)^k / (k+1)! * dt^{k+2} g_{k+1}(i a dt)
    const int k_max = 17;
    const auto g = g_moments(I * (a * dt), k_max);
    Complex sum{0.0, 0.0};
    Complex pref{1.0, 0.0};  // (i b)^k dt^k / (k+1)!
    const double dt2 = dt * dt;
    for (int k = 0; k + 1 <= k_max; ++k) {
        const Complex term = pref * dt2 * g[k + 1];
        sum += term;
        if (std::abs(term) < 1e-18 * std::abs(sum)) break;
        pref *= I * (b * dt) / static_cast<double>(k + 2);
    }
    return sum;
}

}  // namespace

Complex exp_integral_double_plus(double t1, double t2, double mu, double w1, double w2) {
    const double a = mu + w1;
    const double b = mu - w2;
    return std::exp(I * ((a + b) * t1)) * double_core(a, b, t2 - t1);
}

Complex exp_integral_double_minus(double t1, double t2, double mu, double w1, double w2) {
    const double a = mu + w1;
    const double b = -mu - w2;
    return std::exp(I * ((a + b) * t1)) * double_core(a, b, t2 - t1);
}

namespace {

// Depth-first Jacobi-Anger expansion of one exponential branch
//   int e^{i mu t} prod_l e^{i phi_l cos(l w_rf t)} e^{i w t} dt.
class SingleExpander {
  public:
    SingleExpander(double t1, double t2, double mu, double omega_rf,
                   const PhaseSpec& phase, const SeriesBudget& budget)
        : t1_(t1), t2_(t2), mu_(mu), wrf_(omega_rf), budget_(budget) {
        const int levels = phase.order();
        tables_.reserve(levels);
        mass_.assign(levels + 1, 1.0);
        for (int l = levels; l >= 1; --l) {
            const double phi = phase.harmonics[l - 1];
            if (std::abs(phi) > budget.n_max)
                throw BudgetError("phase harmonic exceeds the Bessel cutoff", 0.0);
            mass_[l - 1] = mass_[l] * coefficient_mass(phi);
        }
        for (int l = 1; l <= levels; ++l)
            tables_.push_back(bessel_j_table(budget.n_max, phase.harmonics[l - 1]));
        phi_ = &phase;
    }

    Complex run(double omega, Complex amp) { return dfs(1, omega, amp); }

    long terms = 0;
    double dropped = 0.0;

  private:
    Complex dfs(int level, double omega, Complex amp) {
        const double span = t2_ - t1_;
        if (std::abs(amp) < budget_.eps) {
            dropped += std::abs(amp) * span * mass_[level - 1];
            return {0.0, 0.0};
        }
        if (level > phi_->order()) {
            if (++terms > budget_.max_terms)
                throw BudgetError("series term budget exhausted", dropped);
            return amp * exp_integral_single(t1_, t2_, mu_, omega);
        }
        const double phi = phi_->harmonics[level - 1];
        const auto& j = tables_[level - 1];
        Complex v = dfs(level + 1, omega, amp * j[0]);
        bool pruned = false;
        for (int n = 1; n <= budget_.n_max; ++n) {
            const Complex c = 2.0 * i_pow(n) * j[n];
            if (n > std::abs(phi) && std::abs(amp) * std::abs(c) < budget_.eps) {
                // tail of the level-l series plus everything below it
                dropped += 4.0 * std::abs(amp) * std::abs(j[n]) * span * mass_[level];
                pruned = true;
                break;
            }
            const Complex branch = amp * c * 0.5;
            const double shift = n * level * wrf_;
            v += dfs(level + 1, omega + shift, branch);
            v += dfs(level + 1, omega - shift, branch);
        }
        if (!pruned) {
            if (std::abs(phi) >= budget_.n_max)
                throw BudgetError("phase harmonic too large for the Bessel cutoff", dropped);
            dropped += 4.0 * std::abs(amp) * std::abs(j[budget_.n_max]) * span * mass_[level];
        }
        return v;
    }

    double t1_, t2_, mu_, wrf_;
    const PhaseSpec* phi_;
    const SeriesBudget& budget_;
    std::vector<std::vector<double>> tables_;
    std::vector<double> mass_;
};

}  // namespace

IntegralResult single_integral(double t1, double t2, double mu, double omega,
                               double omega_rf, const PhaseSpec& phase,
                               const SeriesBudget& budget) {
    if (t2 < t1) throw ConfigError("integration interval is reversed");
    SingleExpander ex(t1, t2, mu, omega_rf, phase, budget);
    const Complex a = std::exp(I * phase.phi0);
    const Complex plus = ex.run(omega, {1.0, 0.0});
    const Complex minus = std::conj(ex.run(-omega, {1.0, 0.0}));
    IntegralResult r;
    r.value = (a * plus - std::conj(a) * minus) / (2.0 * I);
    r.dropped_bound = ex.dropped;
    r.terms = ex.terms;
    return r;
}

IntegralResult modulated_single_integral(double t1, double t2, double mu,
                                         const ModulationSpec& mod, double omega_rf,
                                         const PhaseSpec& phase,
                                         const SeriesBudget& budget) {
    if (t2 < t1) throw ConfigError("integration interval is reversed");
    SingleExpander ex(t1, t2, mu, omega_rf, phase, budget);
    const Complex a = std::exp(I * phase.phi0);
    IntegralResult r;
    for (int n = -mod.ncut(); n <= mod.ncut(); ++n) {
        const double cn = mod.coeff(n);
        if (cn == 0.0) continue;
        if (std::abs(cn) < budget.eps) {
            r.dropped_bound += std::abs(cn) * (t2 - t1);
            continue;
        }
        const double w = mod.omega + n * omega_rf;
        const Complex plus = ex.run(w, {cn, 0.0});
        const Complex minus = std::conj(ex.run(-w, {cn, 0.0}));
        r.value += (a * plus - std::conj(a) * minus) / (2.0 * I);
    }
    r.dropped_bound += ex.dropped;
    r.terms = ex.terms;
    return r;
}

namespace {

// Two-sided expansion for the ordered double integral; levels advance in
// lockstep over both ions' phase harmonics.
class DoubleExpander {
  public:
    DoubleExpander(double t1, double t2, double mu, double omega_rf,
                   const PhaseSpec& pa, const PhaseSpec& pb, const SeriesBudget& budget)
        : t1_(t1), t2_(t2), mu_(mu), wrf_(omega_rf), pa_(&pa), pb_(&pb), budget_(budget) {
        levels_ = std::max(pa.order(), pb.order());
        for (int l = 1; l <= levels_; ++l) {
            ja_.push_back(bessel_j_table(budget.n_max, harmonic(pa, l)));
            jb_.push_back(bessel_j_table(budget.n_max, harmonic(pb, l)));
        }
        mass_.assign(levels_ + 1, 1.0);
        for (int l = levels_; l >= 1; --l) {
            if (std::abs(harmonic(pa, l)) > budget.n_max ||
                std::abs(harmonic(pb, l)) > budget.n_max)
                throw BudgetError("phase harmonic exceeds the Bessel cutoff", 0.0);
            mass_[l - 1] =
                mass_[l] * coefficient_mass(harmonic(pa, l)) * coefficient_mass(harmonic(pb, l));
        }
    }

    Complex run(double w1, double w2, Complex c1, Complex c2) {
        return dfs(1, w1, w2, c1, c2);
    }

    long terms = 0;
    double dropped = 0.0;

  private:
    static double harmonic(const PhaseSpec& p, int l) {
        return l <= p.order() ? p.harmonics[l - 1] : 0.0;
    }

    double leaf_scale() const {
        const double span = t2_ - t1_;
        return 0.5 * span * span;
    }

    Complex leaf(double w1, double w2, Complex c1, Complex c2) {
        terms += 4;  // four carrier branches per leaf
        if (terms > budget_.max_terms)
            throw BudgetError("series term budget exhausted", dropped);
        const Complex pp = exp_integral_double_plus(t1_, t2_, mu_, w1, w2);
        const Complex pm = exp_integral_double_minus(t1_, t2_, mu_, w1, w2);
        const Complex mp = exp_integral_double_minus(t1_, t2_, -mu_, w1, w2);
        const Complex mm = exp_integral_double_plus(t1_, t2_, -mu_, w1, w2);
        return (c1 * c2 * pp - c1 * std::conj(c2) * pm - std::conj(c1) * c2 * mp +
                std::conj(c1) * std::conj(c2) * mm) /
               (-4.0);
    }

    Complex dfs(int level, double w1, double w2, Complex c1, Complex c2) {
        if (std::abs(c1 * c2) < budget_.eps) {
            dropped += std::abs(c1 * c2) * leaf_scale() * mass_[level - 1];
            return {0.0, 0.0};
        }
        if (level > levels_) return leaf(w1, w2, c1, c2);

        const double phi1 = harmonic(*pa_, level);
        const double phi2 = harmonic(*pb_, level);
        const auto& j1 = ja_[level - 1];
        const auto& j2 = jb_[level - 1];
        Complex v{0.0, 0.0};
        for (int n1 = 0; n1 <= budget_.n_max; ++n1) {
            const Complex c1p = n1 == 0 ? Complex{j1[0], 0.0} : 2.0 * i_pow(n1) * j1[n1];
            if (n1 > std::abs(phi1) && std::abs(c1 * c2) * std::abs(c1p) < budget_.eps) {
                if (n1 > 0)
                    dropped += 4.0 * std::abs(c1 * c2) * std::abs(j1[n1]) * leaf_scale() *
                               mass_[level] * coefficient_mass(phi2);
                break;
            }
            for (int n2 = 0; n2 <= budget_.n_max; ++n2) {
                const Complex c2p = n2 == 0 ? Complex{j2[0], 0.0} : 2.0 * i_pow(n2) * j2[n2];
                if (n2 > std::abs(phi2) &&
                    std::abs(c1 * c2) * std::abs(c1p) * std::abs(c2p) < budget_.eps) {
                    if (n2 > 0)
                        dropped += 4.0 * std::abs(c1 * c2 * c1p) * std::abs(j2[n2]) *
                                   leaf_scale() * mass_[level];
                    break;
                }
                // each nonzero harmonic splits into two frequency shifts
                const double s1 = n1 * level * wrf_;
                const double s2 = n2 * level * wrf_;
                const Complex a1 = n1 == 0 ? c1 * c1p : c1 * c1p * 0.5;
                const Complex a2 = n2 == 0 ? c2 * c2p : c2 * c2p * 0.5;
                for (int b1 = 0; b1 < (n1 == 0 ? 1 : 2); ++b1) {
                    for (int b2 = 0; b2 < (n2 == 0 ? 1 : 2); ++b2) {
                        v += dfs(level + 1, w1 + (b1 == 0 ? s1 : -s1),
                                 w2 + (b2 == 0 ? s2 : -s2), a1, a2);
                    }
                }
            }
        }
        return v;
    }

    double t1_, t2_, mu_, wrf_;
    const PhaseSpec* pa_;
    const PhaseSpec* pb_;
    const SeriesBudget& budget_;
    int levels_ = 0;
    std::vector<std::vector<double>> ja_, jb_;
    std::vector<double> mass_;
};

}  // namespace

IntegralResult double_integral(double t1, double t2, double mu, double w1, double w2,
                               double omega_rf, const PhaseSpec& phase_a,
                               const PhaseSpec& phase_b, const SeriesBudget& budget) {
    if (t2 < t1) throw ConfigError("integration interval is reversed");
    DoubleExpander ex(t1, t2, mu, omega_rf, phase_a, phase_b, budget);
    const Complex c1 = std::exp(I * phase_a.phi0);
    const Complex c2 = std::exp(I * phase_b.phi0);
    IntegralResult r;
    r.value = ex.run(w1, w2, c1, c2);
    r.dropped_bound = ex.dropped;
    r.terms = ex.terms;
    return r;
}

}  // namespace iongate
