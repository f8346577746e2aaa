// Acceptance suite: one pass/fail line per criterion, each pinned to the
// tolerance it must meet.  Run with --extended for the long 100-ion
// reproduction (hours; excluded from the default test set).

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "iongate/constants.hpp"
#include "iongate/md.hpp"
#include "iongate/pipeline.hpp"
#include "oracles.hpp"

using namespace iongate;

namespace {

struct Outcome {
    bool passed = false;
    std::string detail;
};

double wall() {
    static const auto t0 = std::chrono::steady_clock::now();
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

TrapDrive drive_50mhz(Eigen::Vector3d a, Eigen::Vector3d q) {
    return TrapDrive::from_diagonal(2.0 * pi * 50e6, a, q);
}

EquilibriumTrajectory solved(const TrapDrive& drive, int n_ions, int order,
                             std::uint64_t seed = 1) {
    IterationSettings st;
    const auto period =
        find_equilibrium_damped(drive, n_ions, st, seed, 8 * (2 * order + 1));
    return refine_fourier(fourier_from_samples(period, order), drive, st);
}

LaserConfig x_laser(double mu_rad_s, double tau_s, int n_seg, int ion_a, int ion_b) {
    LaserConfig l;
    l.delta_k = delta_k_counterprop(355e-9);
    l.direction = Eigen::Vector3d::UnitX();
    l.detuning_rad_s = mu_rad_s;
    l.gate_time_s = tau_s;
    l.n_segments = n_seg;
    l.ion_a = ion_a;
    l.ion_b = ion_b;
    return l;
}

char buf[512];

// ----------------------------------------------------------------------
// criterion 1: single-ion Mathieu exponent, seed and refined vs monodromy
Outcome criterion1() {
    const double t_start = wall();
    EquilibriumTrajectory origin;
    origin.n_ions = 1;
    origin.order = 0;
    origin.b.assign(1, Eigen::MatrixXd::Zero(1, 3));
    const TrapDrive drive = drive_50mhz({0.0, 0.04, 0.09}, {0.3, 0.0, 0.0});
    const HessianSeries h = build_hessian_series(origin, drive, 2);
    const ModeSeeds seeds = seed_modes(h);
    const double beta_seed = std::sqrt(seeds.beta2[1]);  // the driven x axis
    const ModeSet set = solve_modes(h, 5, RefineSettings{});
    const double beta = set.modes[1].beta;
    const double beta_oracle = oracle::mathieu_exponent(0.0, 0.3);
    const double elapsed = wall() - t_start;
    const bool ok = std::abs(beta - beta_oracle) < 1e-9 &&
                    std::abs(beta_seed - beta) < 1e-3 && elapsed < 1.0;
    std::snprintf(buf, sizeof buf,
                  "refined %.12f vs monodromy %.12f (|diff| %.1e), seed %.6f, %.2f s",
                  beta, beta_oracle, std::abs(beta - beta_oracle), beta_seed, elapsed);
    return {ok, buf};
}

// criterion 2: two-ion axial spacing from the static force balance
Outcome criterion2() {
    const double t_start = wall();
    const TrapDrive drive = drive_50mhz({-0.015, -0.015, 0.03}, {0.4, -0.4, 0.0});
    const auto traj = solved(drive, 2, 5);
    const Eigen::RowVector3d sep = traj.b[0].row(0) - traj.b[0].row(1);
    const double d = sep.norm();
    const double expect = std::cbrt(8.0 / 0.03);
    const double rel = std::abs(d - expect) / expect;
    const double elapsed = wall() - t_start;
    const bool ok = rel < 1e-6 && traj.converged && elapsed < 10.0;
    std::snprintf(buf, sizeof buf, "spacing %.9f L0 vs (8/0.03)^(1/3) = %.9f (rel %.1e), %.1f s",
                  d, expect, rel, elapsed);
    return {ok, buf};
}

// criterion 3: N = 10 residual certificate at the reference trap parameters
Outcome criterion3() {
    const double t_start = wall();
    const TrapDrive drive = drive_50mhz({-0.015, -0.015, 0.03}, {0.3, -0.3, 0.0});
    const auto traj = solved(drive, 10, 7);
    const double residual = eom_residual(traj, drive, 2048);
    const double elapsed = wall() - t_start;
    const bool ok = residual < 1e-8 && elapsed < 60.0;
    std::snprintf(buf, sizeof buf, "EOM max defect %.3e on a 2048-point grid, %.1f s",
                  residual, elapsed);
    return {ok, buf};
}

// criterion 4: MD versus mode expansion over 1000 RF periods
Outcome criterion4() {
    const double t_start = wall();
    const TrapDrive drive = drive_50mhz({0.003, 0.05, 0.08}, {0.3, -0.3, 0.0});
    const auto traj = solved(drive, 6, 8);
    const HessianSeries h = build_hessian_series(traj, drive, 6);
    RefineSettings rs;
    rs.block_order = 6;
    const ModeSet set = solve_modes(h, 6, rs);
    if (!set.stable) return {false, "mode set unstable"};
    IntegratorSettings is;
    is.periods = 1000;
    is.steps_per_period = 1000;
    is.record_stride = 1000;
    const auto lo = verify_mode(traj, set, ExcitationSpec{0, 0.01}, drive, is);
    const auto hi =
        verify_mode(traj, set, ExcitationSpec{3 * 6 - 1, 0.01}, drive, is);
    const double elapsed = wall() - t_start;
    const bool ok = lo.max_deviation < 1e-3 && hi.max_deviation < 1e-3;
    std::snprintf(buf, sizeof buf,
                  "N=6, beta [%.4f, %.4f]: max deviation %.2e / %.2e L0 (tol 1e-3), %.0f s",
                  set.modes.front().beta, set.modes.back().beta, lo.max_deviation,
                  hi.max_deviation, elapsed);
    return {ok, buf};
}

// criterion 5: series evaluation versus adaptive quadrature, 100 cases per op
Outcome criterion5() {
    const double t_start = wall();
    std::mt19937 rng(2026);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    SeriesBudget budget;
    budget.eps = 1e-11;
    double worst = 0.0;
    long cases = 0;
    auto admit = [&](Complex got, Complex expect) {
        const double err = std::abs(got - expect);
        const double bar = std::max(1e-8 * std::abs(expect), 1e-10);
        worst = std::max(worst, err / bar);
        ++cases;
        return err <= bar;
    };
    bool ok = true;
    auto phase_of = [&](int order, double scale) {
        PhaseSpec p;
        p.phi0 = uni(rng);
        for (int l = 0; l < order; ++l) p.harmonics.push_back(scale * uni(rng));
        return p;
    };
    for (int trial = 0; trial < 100; ++trial) {
        const double t1 = 3.0 * uni(rng);
        const double t2 = t1 + 2.0 * std::abs(uni(rng)) + 0.2;
        const double mu = 4.0 * uni(rng);
        const double w = 4.0 * uni(rng);
        const PhaseSpec p = phase_of(1 + trial % 3, 0.9);
        const auto got = single_integral(t1, t2, mu, w, 2.0, p, budget);
        const Complex expect = oracle::integrate(
            [&](double t) {
                double phi = p.phi0;
                for (int l = 1; l <= p.order(); ++l)
                    phi += p.harmonics[l - 1] * std::cos(2.0 * l * t);
                return std::sin(mu * t + phi) * std::exp(Complex{0.0, w * t});
            },
            t1, t2, 1e-12);
        ok = admit(got.value, expect) && ok;
    }
    for (int trial = 0; trial < 100; ++trial) {
        const double t1 = uni(rng);
        const double t2 = t1 + 1.5 + std::abs(uni(rng));
        const double mu = 3.0 * uni(rng);
        ModulationSpec mod;
        mod.omega = 0.3 + std::abs(uni(rng));
        mod.c.resize(5);
        for (auto& c : mod.c) c = 0.5 * uni(rng);
        mod.c[2] = 1.0 + 0.2 * uni(rng);
        const PhaseSpec p = phase_of(2, 0.7);
        const auto got = modulated_single_integral(t1, t2, mu, mod, 2.0, p, budget);
        const Complex expect = oracle::integrate(
            [&](double t) {
                double phi = p.phi0;
                for (int l = 1; l <= p.order(); ++l)
                    phi += p.harmonics[l - 1] * std::cos(2.0 * l * t);
                Complex carrier{0.0, 0.0};
                for (int n = -2; n <= 2; ++n)
                    carrier += mod.coeff(n) * std::exp(Complex{0.0, (mod.omega + 2.0 * n) * t});
                return std::sin(mu * t + phi) * carrier;
            },
            t1, t2, 1e-12);
        ok = admit(got.value, expect) && ok;
    }
    for (int trial = 0; trial < 100; ++trial) {
        const double t1 = uni(rng);
        const double t2 = t1 + 1.0 + std::abs(uni(rng));
        const double mu = 3.0 * uni(rng);
        const double w1 = 2.0 * uni(rng);
        const double w2 = 2.0 * uni(rng);
        const PhaseSpec pa = phase_of(1 + trial % 2, 0.8);
        const PhaseSpec pb = phase_of(1 + trial % 3, 0.8);
        const auto got = double_integral(t1, t2, mu, w1, w2, 2.0, pa, pb, budget);
        const Complex expect = oracle::integrate2_ordered(
            [&](double ta, double tb) {
                double phia = pa.phi0, phib = pb.phi0;
                for (int l = 1; l <= pa.order(); ++l)
                    phia += pa.harmonics[l - 1] * std::cos(2.0 * l * ta);
                for (int l = 1; l <= pb.order(); ++l)
                    phib += pb.harmonics[l - 1] * std::cos(2.0 * l * tb);
                return std::sin(mu * ta + phia) * std::sin(mu * tb + phib) *
                       std::exp(Complex{0.0, w1 * ta - w2 * tb});
            },
            t1, t2, 5e-12);
        ok = admit(got.value, expect) && ok;
    }
    const double elapsed = wall() - t_start;
    ok = ok && elapsed < 60.0;
    std::snprintf(buf, sizeof buf,
                  "%ld cases, worst error %.2f of the max(1e-8 rel, 1e-10 abs) bar, %.0f s",
                  cases, worst, elapsed);
    return {ok, buf};
}

// shared rig for criteria 6 and 8: four-ion crystal with strong micromotion
struct GateRig {
    TrapDrive drive;
    EquilibriumTrajectory traj;
    ModeSet modes;
    GateContext ctx;
    CouplingMatrix coupling;
    GammaMatrices gammas;
};

GateRig make_gate_rig() {
    GateRig rig{drive_50mhz({0.005, 0.05, 0.08}, {0.3, -0.3, 0.0}), {}, {}, {}, {}, {}};
    rig.traj = solved(rig.drive, 4, 8);
    const HessianSeries h = build_hessian_series(rig.traj, rig.drive, 5);
    rig.modes = solve_modes(h, 5, RefineSettings{});
    rig.ctx = build_context(rig.traj, rig.modes, ytterbium171(), rig.drive,
                            x_laser(2.0 * pi * 10.5e6, 20e-6, 8, 0, 1),
                            ThermalSpectrum::from_doppler(2.0 * pi * 20e6),
                            TruncationSettings{});
    rig.coupling = build_coupling(rig.ctx);
    rig.gammas = build_gamma(rig.ctx);
    return rig;
}

double phase_at(const PhaseSpec& p, double t, double mu, double t0) {
    double phi = p.phi0 - mu * t0;
    for (int l = 1; l <= p.order(); ++l) phi += p.harmonics[l - 1] * std::cos(2.0 * l * t);
    return phi;
}

Complex modulation_at(const ModulationSpec& m, double t) {
    Complex c{0.0, 0.0};
    for (int n = -m.ncut(); n <= m.ncut(); ++n)
        c += m.coeff(n) * std::exp(Complex{0.0, 2.0 * n * t});
    return c;
}

Complex alpha_ode(const GateContext& ctx, const Eigen::VectorXd& omega_seg, int ion,
                  int mode) {
    const double seg = ctx.segment_length();
    Complex alpha{0.0, 0.0};
    for (int n = 0; n < ctx.n_seg; ++n) {
        auto f = [&](double t) {
            return omega_seg[n] * modulation_at(ctx.modulation[mode][ion], t) *
                   std::sin(ctx.mu * t + phase_at(ctx.phase[ion], t, ctx.mu, ctx.t0)) *
                   std::exp(Complex{0.0, ctx.beta[mode] * t});
        };
        const double a = ctx.t0 + n * seg;
        const double b = ctx.t0 + (n + 1) * seg;
        const int steps = static_cast<int>((b - a) * 160);
        Complex acc{0.0, 0.0};
        const double h = (b - a) / steps;
        for (int s = 0; s < steps; ++s) {
            const double x0 = a + s * h;
            acc += (h / 6.0) * (f(x0) + 4.0 * f(x0 + 0.5 * h) + f(x0 + h));
        }
        alpha += acc;
    }
    return Complex{0.0, -1.0} * ctx.eta[mode] * alpha;
}

double theta_ode(const GateContext& ctx, const Eigen::VectorXd& omega_seg) {
    const double t0 = ctx.t0;
    const double seg = ctx.segment_length();
    auto chi = [&](int ion, double t) {
        int n = static_cast<int>((t - t0) / seg);
        n = std::clamp(n, 0, ctx.n_seg - 1);
        return omega_seg[n] * std::sin(ctx.mu * t + phase_at(ctx.phase[ion], t, ctx.mu, t0));
    };
    const int steps = static_cast<int>(ctx.tau * 64);
    double theta = 0.0;
    for (int k = 0; k < ctx.n_modes; ++k) {
        const double e2 = ctx.eta[k] * ctx.eta[k];
        auto inner = [&](int ion, double t) {
            return chi(ion, t) * std::conj(modulation_at(ctx.modulation[k][ion], t)) *
                   std::exp(Complex{0.0, -ctx.beta[k] * t});
        };
        auto outer = [&](int ion, double t) {
            return chi(ion, t) * modulation_at(ctx.modulation[k][ion], t) *
                   std::exp(Complex{0.0, ctx.beta[k] * t});
        };
        Complex ia{0.0, 0.0}, ib{0.0, 0.0};
        double acc = 0.0;
        const double h = ctx.tau / steps;
        for (int s = 0; s < steps; ++s) {
            const double t = t0 + s * h;
            const double q1 = t + 0.25 * h, tm = t + 0.5 * h, q3 = t + 0.75 * h, tp = t + h;
            const Complex ia_mid =
                ia + (h / 12.0) * (inner(0, t) + 4.0 * inner(0, q1) + inner(0, tm));
            const Complex ib_mid =
                ib + (h / 12.0) * (inner(1, t) + 4.0 * inner(1, q1) + inner(1, tm));
            const double g0 = std::imag(outer(0, t) * ib + outer(1, t) * ia);
            const double gm = std::imag(outer(0, tm) * ib_mid + outer(1, tm) * ia_mid);
            ia = ia_mid + (h / 12.0) * (inner(0, tm) + 4.0 * inner(0, q3) + inner(0, tp));
            ib = ib_mid + (h / 12.0) * (inner(1, tm) + 4.0 * inner(1, q3) + inner(1, tp));
            const double g1 = std::imag(outer(0, tp) * ib + outer(1, tp) * ia);
            acc += (h / 6.0) * (g0 + 4.0 * gm + g1);
        }
        theta += e2 * acc;
    }
    return theta;
}

// criterion 6: assembled couplings versus direct integration; exact angle
Outcome criterion6(const GateRig& rig) {
    const double t_start = wall();
    Eigen::VectorXd omega(8);
    omega << 0.9, -0.4, 0.6, 0.2, -0.7, 0.5, -0.2, 0.3;
    omega *= 1e-4;
    double worst_alpha = 0.0;
    for (int k = 0; k < rig.ctx.n_modes; ++k) {
        for (int ion = 0; ion < 2; ++ion) {
            const Complex assembled =
                rig.coupling.rows[k][ion].cwiseProduct(omega.cast<Complex>()).sum();
            const Complex direct = alpha_ode(rig.ctx, omega, ion, k);
            worst_alpha = std::max(worst_alpha, std::abs(assembled - direct));
        }
    }
    const double theta_assembled = omega.dot(rig.gammas.gamma * omega);
    const double theta_direct = theta_ode(rig.ctx, omega);
    const double theta_err =
        std::abs(theta_assembled - theta_direct) / std::max(1e-12, std::abs(theta_direct));

    auto [pulse, rep] = optimize_pulse(rig.ctx, rig.coupling, rig.gammas);
    const double angle_err = std::abs(rep.theta - pulse.theta_sign * pi / 4.0);
    double alpha_term = 0.0;
    for (int k = 0; k < rig.ctx.n_modes; ++k)
        for (int s = 0; s < 2; ++s)
            alpha_term += std::norm(rep.alpha[k][s]) * (2.0 * rig.ctx.nbar[k] + 1.0);
    const double target = pulse.theta_sign * pi / 4.0;
    const double recomputed =
        0.8 * ((rep.theta - target) * (rep.theta - target) + alpha_term);
    const double self_err = std::abs(recomputed - rep.delta_f);

    const double elapsed = wall() - t_start;
    const bool ok =
        worst_alpha < 1e-6 && theta_err < 1e-6 && angle_err < 1e-12 && self_err < 1e-12;
    std::snprintf(buf, sizeof buf,
                  "alpha err %.1e, theta rel err %.1e, |theta - pi/4| %.1e, dF self "
                  "consistency %.1e, %.0f s",
                  worst_alpha, theta_err, angle_err, self_err, elapsed);
    return {ok, buf};
}

// criterion 7: the same pulse on a micromotion-blind context
Outcome criterion7() {
    const double t_start = wall();
    const TrapDrive drive = drive_50mhz({0.005, 0.05, 0.08}, {0.3, -0.3, 0.0});
    const auto traj = solved(drive, 2, 7);
    const HessianSeries h = build_hessian_series(traj, drive, 5);
    const ModeSet modes = solve_modes(h, 5, RefineSettings{});
    const ThermalSpectrum thermal = ThermalSpectrum::from_doppler(2.0 * pi * 20e6);
    const LaserConfig laser = x_laser(2.0 * pi * 6.0e6, 20e-6, 6, 0, 1);
    const GateContext ctx = build_context(traj, modes, ytterbium171(), drive, laser,
                                          thermal, TruncationSettings{});
    auto [pulse, rep] = optimize_pulse(ctx, build_coupling(ctx), build_gamma(ctx));
    TruncationSettings bare;
    bare.phase_order = 0;
    bare.sideband_order = 0;
    const GateContext bctx =
        build_context(traj, modes, ytterbium171(), drive, laser, thermal, bare);
    const GateReport mispriced = evaluate_sequence(bctx, pulse, 0.0);
    const double ratio = mispriced.delta_f / rep.delta_f;
    const double elapsed = wall() - t_start;
    const bool ok = ratio >= 10.0;
    std::snprintf(buf, sizeof buf,
                  "delta_F %.3e (full) -> %.3e (L=0/ncut=0): ratio %.1f (need >= 10), %.0f s",
                  rep.delta_f, mispriced.delta_f, ratio, elapsed);
    return {ok, buf};
}

// criterion 8: robustness-hardened pulse reduces the detuning sensitivity
Outcome criterion8(const GateRig& rig) {
    const double t_start = wall();
    auto [plain, plain_rep] = optimize_pulse(rig.ctx, rig.coupling, rig.gammas);
    const RobustDesign rd = design_robust(rig.ctx, RobustSettings{});
    const double mu0 = rig.ctx.mu / rig.ctx.units.time_s;
    const double dmu = 2.0 * pi * 1e3;
    auto slope = [&](const PulseSequence& p) {
        const GateContext cp = rig.ctx.with_detuning(mu0 + dmu);
        const GateContext cm = rig.ctx.with_detuning(mu0 - dmu);
        const GateReport rp = evaluate_with(cp, build_coupling(cp), build_gamma(cp), p, cp.t0);
        const GateReport rm = evaluate_with(cm, build_coupling(cm), build_gamma(cm), p, cm.t0);
        return std::abs(rp.delta_f - rm.delta_f) / (2.0 * dmu);
    };
    const double s_plain = slope(plain);
    const double s_robust = slope(rd.pulse);
    const double reduction = s_plain / s_robust;
    const double degradation = rd.report.delta_f / plain_rep.delta_f;
    const double elapsed = wall() - t_start;
    const bool ok = reduction >= 5.0 && degradation <= 3.0;
    std::snprintf(buf, sizeof buf,
                  "|d dF/d mu| %.2e -> %.2e (x%.1f reduction, need >= 5); dF %.2e -> %.2e "
                  "(x%.2f, need <= 3), %.0f s",
                  s_plain, s_robust, reduction, plain_rep.delta_f, rd.report.delta_f,
                  degradation, elapsed);
    return {ok, buf};
}

// criterion 9 (extended): the 100-ion reference crystal
Outcome criterion9() {
    const double t_start = wall();
    const TrapDrive drive = drive_50mhz({-0.015, -0.015, 0.03}, {0.3, -0.3, 0.0});
    std::printf("  [extended] solving the 100-ion crystal...\n");
    const auto traj = solved(drive, 100, 5, 1);
    std::printf("  [extended] residual %.2e (%.0f s); solving 300 modes...\n",
                traj.residual, wall() - t_start);
    const HessianSeries h = build_hessian_series(traj, drive, 5);
    RefineSettings rs;
    rs.n_threads = 2;
    const ModeSet modes = solve_modes(h, 5, rs);
    const double beta1 = modes.modes.front().beta;
    const double beta300 = modes.modes.back().beta;
    std::printf("  [extended] beta_1 = %.6f (ref 0.001340), beta_300 = %.6f (ref 0.3032), "
                "stable=%d (%.0f s)\n",
                beta1, beta300, modes.stable ? 1 : 0, wall() - t_start);
    const bool betas_ok = std::abs(beta1 - 0.001340) / 0.001340 < 1e-2 &&
                          std::abs(beta300 - 0.3032) / 0.3032 < 1e-2;

    // pick the two ions with the largest micromotion-bearing coupling near
    // the crystal edge, mirroring the published example's red pair
    int ion_a = 0, ion_b = 1;
    {
        std::vector<std::pair<double, int>> by_x;
        for (int i = 0; i < 100; ++i)
            by_x.emplace_back(std::abs(traj.b[0](i, 0)), i);
        std::sort(by_x.begin(), by_x.end());
        ion_a = by_x[40].second;
        ion_b = by_x[42].second;
    }
    LaserConfig laser = x_laser(2.0 * pi * 7.3124e6, 300e-6, 15, ion_a, ion_b);
    const ThermalSpectrum thermal = ThermalSpectrum::from_doppler(2.0 * pi * 20e6);
    const GateContext ctx = build_context(traj, modes, ytterbium171(), drive, laser,
                                          thermal, TruncationSettings{});
    const CouplingMatrix coupling = build_coupling(ctx);
    const GammaMatrices gammas = build_gamma(ctx);
    auto [pulse, rep] = optimize_pulse(ctx, coupling, gammas);
    std::printf("  [extended] ions (%d, %d): dF = %.3e at n_seg=15 (%.0f s)\n", ion_a + 1,
                ion_b + 1, rep.delta_f, wall() - t_start);
    const bool gate_ok = rep.delta_f < 2e-3;

    double mean_f = 0.0;
    const int t0_steps = 10;
    for (int i = 0; i < t0_steps; ++i) {
        const double t0 = i * (2.0 * pi / drive.rf_rad_s) / t0_steps;
        mean_f += 1.0 - evaluate_sequence(ctx, pulse, t0).delta_f;
    }
    mean_f /= t0_steps;
    std::printf("  [extended] mean fidelity over t0: %.5f (ref 0.9988 +- 0.0005, %.0f s)\n",
                mean_f, wall() - t_start);
    const bool t0_ok = std::abs(mean_f - 0.9988) < 5e-4;

    LaserConfig laser100 = laser;
    laser100.detuning_rad_s = 2.0 * pi * 7.3374e6;
    laser100.n_segments = 100;
    const GateContext ctx100 = build_context(traj, modes, ytterbium171(), drive, laser100,
                                             thermal, TruncationSettings{});
    auto [pulse100, rep100] = optimize_pulse(ctx100, build_coupling(ctx100),
                                             build_gamma(ctx100));
    std::printf("  [extended] n_seg=100: dF = %.3e (ref 2e-5, %.0f s)\n", rep100.delta_f,
                wall() - t_start);
    const bool seg100_ok = rep100.delta_f < 5.0 * 2e-5;

    const bool ok = betas_ok && gate_ok && t0_ok && seg100_ok;
    std::snprintf(buf, sizeof buf,
                  "beta_1 %.6f, beta_300 %.4f, dF(15) %.2e, mean F %.5f, dF(100) %.2e, %.0f s",
                  beta1, beta300, rep.delta_f, mean_f, rep100.delta_f, wall() - t_start);
    return {ok, buf};
}

}  // namespace

int main(int argc, char** argv) {
    const bool extended = argc > 1 && std::strcmp(argv[1], "--extended") == 0;
    int failures = 0;
    auto report = [&](int id, const char* name, const Outcome& o) {
        std::printf("[%s] criterion %d: %s — %s\n", o.passed ? "PASS" : "FAIL", id, name,
                    o.detail.c_str());
        std::fflush(stdout);
        if (!o.passed) ++failures;
    };

    try {
        report(1, "single-ion Mathieu exponent", criterion1());
        report(2, "two-ion axial equilibrium spacing", criterion2());
        report(3, "ten-ion equilibrium residual certificate", criterion3());
        report(4, "MD versus mode expansion over 1000 RF periods", criterion4());
        report(5, "oscillatory-integral oracle suite", criterion5());
        const GateRig rig = make_gate_rig();
        report(6, "gate assembly versus direct integration", criterion6(rig));
        report(7, "micromotion-blind context misprices the pulse", criterion7());
        report(8, "robust design reduces detuning sensitivity", criterion8(rig));
        if (extended) report(9, "100-ion reference reproduction", criterion9());
    } catch (const std::exception& e) {
        std::printf("[FAIL] acceptance aborted: %s\n", e.what());
        return 1;
    }

    if (failures == 0) {
        std::printf("all acceptance criteria passed%s\n",
                    extended ? " (including extended)" : "");
        return 0;
    }
    std::printf("%d criterion(s) failed\n", failures);
    return 1;
}
