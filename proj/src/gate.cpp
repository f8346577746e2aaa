#include "iongate/gate.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <thread>

#include <Eigen/Eigenvalues>

#include "iongate/constants.hpp"
#include "iongate/units.hpp"

namespace iongate {

GateContext build_context(const EquilibriumTrajectory& crystal, const ModeSet& modes,
                          const IonSpecies& species, const TrapDrive& drive,
                          const LaserConfig& laser, const ThermalSpectrum& thermal,
                          const TruncationSettings& trunc) {
    laser.validate();
    trunc.validate();
    if (!modes.stable)
        throw InstabilityError("mode set carries an instability flag; refusing gate design");
    const UnitSystem units = build_units(species, drive);
    const int n_modes = static_cast<int>(modes.modes.size());
    const int ions[2] = {laser.ion_a, laser.ion_b};
    if (laser.ion_a >= crystal.n_ions || laser.ion_b >= crystal.n_ions)
        throw ConfigError("driven ions outside the crystal");

    GateContext ctx;
    ctx.n_modes = n_modes;
    ctx.units = units;
    ctx.ion_a = laser.ion_a;
    ctx.ion_b = laser.ion_b;
    ctx.mu = laser.detuning_rad_s * units.time_s;
    ctx.tau = laser.gate_time_s / units.time_s;
    ctx.n_seg = laser.n_segments;
    ctx.t0 = laser.start_offset_s / units.time_s;
    ctx.omega_rf = drive.rf_rad_s * units.time_s;  // = 2 by construction
    ctx.omega_max = laser.omega_max_rad_s * units.time_s;
    ctx.budget.eps = trunc.precision;
    ctx.budget.n_max = trunc.bessel_cutoff;
    if (!ctx.rabi_harmonics.empty())
        throw ConfigError("beam-profile Rabi modulation is not supported");

    // motional phase of each driven ion: dk . R_j(t) projected on the beam
    const double dk_l0 = laser.delta_k * units.length_m;
    for (int s = 0; s < 2; ++s) {
        const int j = ions[s];
        PhaseSpec p;
        p.phi0 = dk_l0 * laser.direction.dot(crystal.b[0].row(j)) + laser.static_phase_rad;
        for (int l = 1; l <= trunc.phase_order; ++l) {
            const double bl = l <= crystal.order
                                  ? laser.direction.dot(crystal.b[l].row(j))
                                  : 0.0;
            p.harmonics.push_back(2.0 * dk_l0 * bl);
        }
        ctx.phase[s] = std::move(p);
    }

    ctx.beta.resize(n_modes);
    ctx.eta.resize(n_modes);
    ctx.nbar.resize(n_modes);
    ctx.modulation.resize(n_modes);
    for (int k = 0; k < n_modes; ++k) {
        const NormalMode& m = modes.modes[k];
        if (!m.normalized)
            throw ConfigError("mode set must be normalized for gate design");
        ctx.beta[k] = m.beta;
        const double omega_k = m.beta * units.frequency_rad_s;
        const double eta = lamb_dicke(laser.delta_k, species.mass_kg, omega_k);
        if (!(eta <= 1.0))
            throw ConfigError("Lamb-Dicke parameter " + std::to_string(eta) +
                              " >= 1 for mode " + std::to_string(k + 1));
        if (eta > 0.3)
            std::fprintf(stderr, "iongate: Lamb-Dicke parameter %.3f for mode %d\n", eta,
                         k + 1);
        ctx.eta[k] = eta;
        ctx.nbar[k] = thermal.nbar(omega_k);
        const int nc = std::min(trunc.sideband_order, m.ncut);
        for (int s = 0; s < 2; ++s) {
            ModulationSpec spec;
            spec.omega = m.beta;
            spec.c.assign(2 * trunc.sideband_order + 1, 0.0);
            for (int n = -nc; n <= nc; ++n) {
                const Eigen::VectorXd& c = m.sideband(n);
                spec.c[n + trunc.sideband_order] =
                    laser.direction.dot(c.segment<3>(3 * ions[s]));
            }
            ctx.modulation[k][s] = std::move(spec);
        }
    }
    return ctx;
}

namespace {

PhaseSpec shifted_phase(const PhaseSpec& base, double mu, double t0) {
    PhaseSpec p = base;
    p.phi0 -= mu * t0;  // the drive clock starts at the gate start
    return p;
}

}  // namespace

CouplingMatrix build_coupling_at(const GateContext& ctx, double t0) {
    CouplingMatrix out;
    out.rows.resize(ctx.n_modes);
    out.integrals.resize(ctx.n_modes);
    const double seg = ctx.segment_length();
    const PhaseSpec phases[2] = {shifted_phase(ctx.phase[0], ctx.mu, t0),
                                 shifted_phase(ctx.phase[1], ctx.mu, t0)};
    for (int k = 0; k < ctx.n_modes; ++k) {
        for (int s = 0; s < 2; ++s) {
            Eigen::VectorXcd raw(ctx.n_seg);
            for (int n = 0; n < ctx.n_seg; ++n) {
                const double a = t0 + n * seg;
                const double b = t0 + (n + 1) * seg;
                IntegralResult r = modulated_single_integral(
                    a, b, ctx.mu, ctx.modulation[k][s], ctx.omega_rf, phases[s], ctx.budget);
                raw[n] = r.value;
                out.dropped_bound += ctx.eta[k] * r.dropped_bound;
                out.terms += r.terms;
            }
            out.integrals[k][s] = raw;
            out.rows[k][s] = Complex{0.0, -1.0} * ctx.eta[k] * raw;
        }
    }
    return out;
}

CouplingMatrix build_coupling(const GateContext& ctx) {
    return build_coupling_at(ctx, ctx.t0);
}

GammaMatrices build_gamma_at(const GateContext& ctx, double t0) {
    const int ns = ctx.n_seg;
    GammaMatrices out;
    out.gamma_pre = Eigen::MatrixXcd::Zero(ns, ns);
    const double seg = ctx.segment_length();
    const PhaseSpec phases[2] = {shifted_phase(ctx.phase[0], ctx.mu, t0),
                                 shifted_phase(ctx.phase[1], ctx.mu, t0)};

    // p > q: products of the per-segment single integrals
    const CouplingMatrix coupling = build_coupling_at(ctx, t0);
    out.dropped_bound += coupling.dropped_bound;
    out.terms += coupling.terms;
    for (int k = 0; k < ctx.n_modes; ++k) {
        const double e2 = ctx.eta[k] * ctx.eta[k];
        const auto& ia = coupling.integrals[k][0];
        const auto& ib = coupling.integrals[k][1];
        for (int p = 1; p < ns; ++p)
            for (int q = 0; q < p; ++q)
                out.gamma_pre(p, q) +=
                    e2 * (ia[p] * std::conj(ib[q]) + ib[p] * std::conj(ia[q]));
    }

    // p == q: ordered double integrals, summed over both ion orderings and
    // all sideband pairs
    for (int k = 0; k < ctx.n_modes; ++k) {
        const double e2 = ctx.eta[k] * ctx.eta[k];
        const auto& ma = ctx.modulation[k][0];
        const auto& mb = ctx.modulation[k][1];
        const int nc = ma.ncut();
        for (int p = 0; p < ns; ++p) {
            const double a = t0 + p * seg;
            const double b = t0 + (p + 1) * seg;
            Complex acc{0.0, 0.0};
            for (int order = 0; order < 2; ++order) {
                const auto& m1 = order == 0 ? ma : mb;
                const auto& m2 = order == 0 ? mb : ma;
                const PhaseSpec& p1 = order == 0 ? phases[0] : phases[1];
                const PhaseSpec& p2 = order == 0 ? phases[1] : phases[0];
                for (int n1 = -nc; n1 <= nc; ++n1) {
                    const double c1 = m1.coeff(n1);
                    if (c1 == 0.0) continue;
                    for (int n2 = -nc; n2 <= nc; ++n2) {
                        const double c2 = m2.coeff(n2);
                        if (c2 == 0.0) continue;
                        if (std::abs(c1 * c2) < ctx.budget.eps) {
                            out.dropped_bound +=
                                e2 * std::abs(c1 * c2) * 0.5 * seg * seg;
                            continue;
                        }
                        const double w1 = ctx.beta[k] + n1 * ctx.omega_rf;
                        const double w2 = ctx.beta[k] + n2 * ctx.omega_rf;
                        IntegralResult r = double_integral(a, b, ctx.mu, w1, w2,
                                                           ctx.omega_rf, p1, p2, ctx.budget);
                        acc += c1 * c2 * r.value;
                        out.dropped_bound += e2 * std::abs(c1 * c2) * r.dropped_bound;
                        out.terms += r.terms;
                    }
                }
            }
            out.gamma_pre(p, p) += e2 * acc;
        }
    }

    out.gamma_prime = out.gamma_pre.imag();
    out.gamma = 0.5 * (out.gamma_prime + out.gamma_prime.transpose());
    return out;
}

GammaMatrices build_gamma(const GateContext& ctx) { return build_gamma_at(ctx, ctx.t0); }

OptimizationProblem make_problem(const GateContext& ctx, const CouplingMatrix& coupling,
                                 const GammaMatrices& gammas) {
    const int ns = ctx.n_seg;
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(ns, ns);
    for (int k = 0; k < ctx.n_modes; ++k) {
        const double w = 2.0 * ctx.nbar[k] + 1.0;
        for (int s = 0; s < 2; ++s) {
            const auto& row = coupling.rows[k][s];
            m += w * (row.conjugate() * row.transpose());
        }
    }
    OptimizationProblem prob;
    prob.m = m.real();
    prob.m = 0.5 * (prob.m + prob.m.transpose()).eval();
    prob.gamma = gammas.gamma;
    return prob;
}

namespace {

GateReport report_from_parts(const GateContext& ctx, const CouplingMatrix& coupling,
                             const GammaMatrices& gammas, const Eigen::VectorXd& omega,
                             int theta_sign, double t0) {
    GateReport rep;
    rep.t0 = t0;
    rep.theta = omega.dot(gammas.gamma * omega);
    rep.alpha.resize(ctx.n_modes);
    rep.mode_infidelity.resize(ctx.n_modes);
    double alpha_term = 0.0;
    for (int k = 0; k < ctx.n_modes; ++k) {
        double contrib = 0.0;
        for (int s = 0; s < 2; ++s) {
            const Complex a = coupling.rows[k][s].cwiseProduct(omega.cast<Complex>()).sum();
            rep.alpha[k][s] = a;
            contrib += std::norm(a) * (2.0 * ctx.nbar[k] + 1.0);
            rep.max_alpha_abs = std::max(rep.max_alpha_abs, std::abs(a));
        }
        rep.mode_infidelity[k] = 0.8 * contrib;
        alpha_term += contrib;
    }
    const double target = theta_sign * pi / 4.0;
    rep.delta_f = 0.8 * ((rep.theta - target) * (rep.theta - target) + alpha_term);
    rep.dropped_bound = coupling.dropped_bound + gammas.dropped_bound;
    return rep;
}

}  // namespace

std::pair<PulseSequence, GateReport> optimize_pulse(const GateContext& ctx,
                                                    const CouplingMatrix& coupling,
                                                    const GammaMatrices& gammas) {
    const OptimizationProblem prob = make_problem(ctx, coupling, gammas);
    const int ns = ctx.n_seg;
    if (!(prob.gamma.cwiseAbs().maxCoeff() > 0.0))
        throw ConvergenceError("two-qubit form is identically zero");

    Eigen::GeneralizedEigenSolver<Eigen::MatrixXd> es;
    es.compute(prob.m, prob.gamma, true);
    if (es.info() != Eigen::Success)
        throw ConvergenceError("generalized eigensolve failed");

    const double mscale = prob.m.cwiseAbs().maxCoeff();
    double best_abs = std::numeric_limits<double>::infinity();
    double best_lambda = 0.0;
    Eigen::VectorXd best_vec;
    double best_g = 0.0;
    for (int i = 0; i < ns; ++i) {
        const Complex alpha = es.alphas()[i];
        const double beta = es.betas()[i];
        if (std::abs(beta) < 1e-14 * (std::abs(alpha) + mscale)) continue;  // infinite
        const Complex lam = alpha / beta;
        if (std::abs(lam.imag()) > 1e-8 * (1.0 + std::abs(lam))) continue;
        // rotate the eigenvector real
        Eigen::VectorXcd vc = es.eigenvectors().col(i);
        int imax = 0;
        vc.cwiseAbs().maxCoeff(&imax);
        vc *= std::abs(vc[imax]) / vc[imax];
        if (vc.imag().cwiseAbs().maxCoeff() > 1e-8 * vc.real().cwiseAbs().maxCoeff())
            continue;
        Eigen::VectorXd v = vc.real();
        v.normalize();
        const double g = v.dot(prob.gamma * v);
        if (std::abs(g) < 1e-14) continue;
        if (std::abs(lam.real()) < best_abs) {
            best_abs = std::abs(lam.real());
            best_lambda = lam.real();
            best_vec = v;
            best_g = g;
        }
    }
    if (!best_vec.size())
        throw ConvergenceError("no usable generalized eigenpair (all infinite or defective)");

    PulseSequence pulse;
    pulse.theta_sign = best_g > 0.0 ? 1 : -1;
    pulse.omega = best_vec * std::sqrt((pi / 4.0) / std::abs(best_g));
    if (ctx.omega_max > 0.0 && pulse.omega.cwiseAbs().maxCoeff() > ctx.omega_max)
        pulse.bound_exceeded = true;

    GateReport rep = report_from_parts(ctx, coupling, gammas, pulse.omega,
                                       pulse.theta_sign, ctx.t0);
    rep.lambda = best_lambda;
    rep.eigen_residual =
        (prob.m * best_vec - best_lambda * prob.gamma * best_vec).norm() / best_vec.norm();
    return {pulse, rep};
}

GateReport evaluate_with(const GateContext& ctx, const CouplingMatrix& coupling,
                         const GammaMatrices& gammas, const PulseSequence& pulse,
                         double t0) {
    if (pulse.omega.size() != ctx.n_seg)
        throw ConfigError("pulse length does not match the segment count");
    return report_from_parts(ctx, coupling, gammas, pulse.omega, pulse.theta_sign, t0);
}

GateReport evaluate_sequence(const GateContext& ctx, const PulseSequence& pulse,
                             double t0_s) {
    const double t0 = t0_s / ctx.units.time_s;
    const CouplingMatrix coupling = build_coupling_at(ctx, t0);
    const GammaMatrices gammas = build_gamma_at(ctx, t0);
    return evaluate_with(ctx, coupling, gammas, pulse, t0);
}

namespace {

template <typename Fn>
void parallel_for(int count, int n_threads, Fn&& fn) {
    if (n_threads <= 1 || count <= 1) {
        for (int i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    const int workers = std::min(n_threads, count);
    std::vector<std::exception_ptr> errors(workers);
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&, w]() {
            try {
                for (int i = next++; i < count; i = next++) fn(i);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

}  // namespace

std::vector<ScanPoint> scan_detuning(const GateContext& ctx,
                                     const std::vector<double>& mu_rad_s, int n_threads) {
    std::vector<ScanPoint> out(mu_rad_s.size());
    parallel_for(static_cast<int>(mu_rad_s.size()), n_threads, [&](int i) {
        ScanPoint& pt = out[i];
        pt.mu_rad_s = mu_rad_s[i];
        try {
            const GateContext local = ctx.with_detuning(mu_rad_s[i]);
            const CouplingMatrix coupling = build_coupling(local);
            const GammaMatrices gammas = build_gamma(local);
            auto [pulse, rep] = optimize_pulse(local, coupling, gammas);
            pt.delta_f = rep.delta_f;
            pt.theta = rep.theta;
            pt.max_alpha_abs = rep.max_alpha_abs;
            pt.status = pulse.bound_exceeded ? "rabi-bound" : "ok";
        } catch (const std::exception& e) {
            pt.delta_f = std::numeric_limits<double>::quiet_NaN();
            pt.theta = std::numeric_limits<double>::quiet_NaN();
            pt.max_alpha_abs = std::numeric_limits<double>::quiet_NaN();
            pt.status = std::string("error: ") + e.what();
        }
    });
    return out;
}

std::vector<T0Point> scan_start_offset(const GateContext& ctx, const PulseSequence& pulse,
                                       const std::vector<double>& t0_s, int n_threads) {
    std::vector<T0Point> out(t0_s.size());
    parallel_for(static_cast<int>(t0_s.size()), n_threads, [&](int i) {
        const GateReport rep = evaluate_sequence(ctx, pulse, t0_s[i]);
        out[i] = T0Point{t0_s[i], rep.delta_f, rep.theta, rep.max_alpha_abs};
    });
    return out;
}

}  // namespace iongate
