// Command-line front end: equilibrium / modes / verify-md / design / scan /
// robust / t0-scan over a shared config file, with snapshot-based staging so
// the expensive solves run once per crystal.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "iongate/md.hpp"
#include "iongate/pipeline.hpp"

namespace fs = std::filesystem;
using namespace iongate;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitInstability = 3;
constexpr int kExitConvergence = 4;
constexpr int kExitOther = 1;

struct Options {
    std::string config_path;
    std::string out_dir = ".";
    std::uint64_t seed = 1;
    int threads = 1;
    double precision = 0.0;
    int fourier_order = -1;
    int phase_order = -1;
    int ncut = -1;
    std::string grid;  // MIN:MAX:STEP
    int md_mode = 1;   // 1-based
    double md_amplitude = 0.01;
    int md_periods = 1000;
    int t0_steps = 40;
    bool dump_series_stats = false;
};

std::string out_path(const Options& opt, const std::string& name) {
    return (fs::path(opt.out_dir) / name).string();
}

SimulationConfig load_config(const Options& opt) {
    SimulationConfig cfg = parse_config_file(opt.config_path);
    if (opt.precision > 0.0) cfg.truncation.precision = opt.precision;
    if (opt.fourier_order >= 0) cfg.truncation.fourier_order = opt.fourier_order;
    if (opt.phase_order >= 0) cfg.truncation.phase_order = opt.phase_order;
    if (opt.ncut >= 0) cfg.truncation.sideband_order = opt.ncut;
    cfg.truncation.validate();
    return cfg;
}

// Remove partial outputs if a stage fails midway.
class OutputGuard {
  public:
    void track(const std::string& path) { paths_.push_back(path); }
    void commit() { paths_.clear(); }
    ~OutputGuard() {
        for (const auto& p : paths_) {
            std::error_code ec;
            fs::remove(p, ec);
        }
    }

  private:
    std::vector<std::string> paths_;
};

std::vector<double> parse_grid(const std::string& text) {
    double lo = 0, hi = 0, step = 0;
    if (std::sscanf(text.c_str(), "%lf:%lf:%lf", &lo, &hi, &step) != 3)
        throw ConfigError("grid must be MIN:MAX:STEP");
    if (!(step > 0.0) || !(hi >= lo)) throw ConfigError("grid needs min <= max and step > 0");
    std::vector<double> g;
    for (double v = lo; v <= hi + 0.5 * step; v += step) g.push_back(v);
    return g;
}

void write_header(std::ofstream& f, const SimulationConfig& cfg) {
    f << "# iongate-csv v1\n";
    f << "# config_hash " << cfg.config_hash << "\n";
    f << "# truncation fourier_order=" << cfg.truncation.fourier_order
      << " phase_order=" << cfg.truncation.phase_order
      << " sideband_order=" << cfg.truncation.sideband_order
      << " precision=" << cfg.truncation.precision
      << " bessel_cutoff=" << cfg.truncation.bessel_cutoff << "\n";
}

CrystalSnapshot load_or_solve_crystal(const SimulationConfig& cfg, const Options& opt,
                                      OutputGuard& guard) {
    const std::string path = out_path(opt, "crystal.snapshot");
    if (fs::exists(path)) {
        CrystalSnapshot snap = read_snapshot(path);
        if (snap.config_hash != cfg.config_hash)
            std::fprintf(stderr, "iongate: warning: snapshot %s was built from a different config\n",
                         path.c_str());
        return snap;
    }
    CrystalSnapshot snap = solve_crystal(cfg, opt.seed);
    guard.track(path);
    write_snapshot(path, snap);
    return snap;
}

CrystalSnapshot load_or_solve_modes(const SimulationConfig& cfg, const Options& opt,
                                    OutputGuard& guard) {
    CrystalSnapshot snap = load_or_solve_crystal(cfg, opt, guard);
    if (!snap.modes) {
        attach_modes(snap, opt.threads);
        const std::string path = out_path(opt, "crystal.snapshot");
        guard.track(path);
        write_snapshot(path, snap);
    }
    return snap;
}

void write_pulse_csv(const std::string& path, const SimulationConfig& cfg,
                     const GateContext& ctx, const PulseSequence& pulse) {
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw IoError("cannot write " + path);
    write_header(f, cfg);
    f << "segment_index,t_start_s,t_end_s,Omega_rad_s\n";
    const double seg_s = ctx.segment_length() * ctx.units.time_s;
    const double t0_s = ctx.t0 * ctx.units.time_s;
    const Eigen::VectorXd omega = pulse.omega_rad_s(ctx.units);
    char buf[160];
    for (int n = 0; n < ctx.n_seg; ++n) {
        std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g\n", n + 1, t0_s + n * seg_s,
                      t0_s + (n + 1) * seg_s, omega[n]);
        f << buf;
    }
}

void write_report(const std::string& path, const SimulationConfig& cfg,
                  const GateContext& ctx, const GateReport& rep,
                  const PulseSequence& pulse) {
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw IoError("cannot write " + path);
    f << "iongate-gate-report v1\n";
    f << "config_hash " << cfg.config_hash << "\n";
    f << "truncation fourier_order=" << cfg.truncation.fourier_order
      << " phase_order=" << cfg.truncation.phase_order
      << " sideband_order=" << cfg.truncation.sideband_order
      << " precision=" << cfg.truncation.precision
      << " bessel_cutoff=" << cfg.truncation.bessel_cutoff << "\n";
    char buf[200];
    std::snprintf(buf, sizeof buf, "t0_s %.17g\n", rep.t0 * ctx.units.time_s);
    f << buf;
    std::snprintf(buf, sizeof buf, "theta_rad %.17g\n", rep.theta);
    f << buf;
    std::snprintf(buf, sizeof buf, "theta_target_rad %.17g\n",
                  pulse.theta_sign * 3.14159265358979323846 / 4.0);
    f << buf;
    std::snprintf(buf, sizeof buf, "delta_F %.17g\n", rep.delta_f);
    f << buf;
    std::snprintf(buf, sizeof buf, "max_alpha_abs %.17g\n", rep.max_alpha_abs);
    f << buf;
    std::snprintf(buf, sizeof buf, "series_dropped_bound %.3g\n", rep.dropped_bound);
    f << buf;
    f << "rabi_bound_exceeded " << (pulse.bound_exceeded ? 1 : 0) << "\n";
    f << "# alpha table: mode ion Re Im nbar mode_infidelity\n";
    for (int k = 0; k < static_cast<int>(rep.alpha.size()); ++k) {
        for (int s = 0; s < 2; ++s) {
            std::snprintf(buf, sizeof buf, "alpha %d %d %.17g %.17g %.6g %.6g\n", k + 1,
                          s == 0 ? ctx.ion_a + 1 : ctx.ion_b + 1, rep.alpha[k][s].real(),
                          rep.alpha[k][s].imag(), ctx.nbar[k], rep.mode_infidelity[k]);
            f << buf;
        }
    }
    f << "end\n";
}

int run(const std::string& cmd, const Options& opt) {
    const SimulationConfig cfg = load_config(opt);
    fs::create_directories(opt.out_dir);
    OutputGuard guard;

    if (cmd == "equilibrium") {
        CrystalSnapshot snap = solve_crystal(cfg, opt.seed);
        const std::string path = out_path(opt, "crystal.snapshot");
        guard.track(path);
        write_snapshot(path, snap);
        std::printf("crystal: N=%d M=%d residual=%.3g seed=%llu -> %s\n",
                    snap.trajectory.n_ions, snap.trajectory.order, snap.trajectory.residual,
                    static_cast<unsigned long long>(snap.seed), path.c_str());
        guard.commit();
        return 0;
    }
    if (cmd == "modes") {
        CrystalSnapshot snap = load_or_solve_crystal(cfg, opt, guard);
        attach_modes(snap, opt.threads);
        const std::string path = out_path(opt, "crystal.snapshot");
        guard.track(path);
        write_snapshot(path, snap);
        const auto& ms = *snap.modes;
        std::printf("modes: %zu solved, stable=%d, beta range [%.6g, %.6g]\n",
                    ms.modes.size(), ms.stable ? 1 : 0, ms.modes.front().beta,
                    ms.modes.back().beta);
        if (!ms.stable) {
            std::fprintf(stderr, "iongate: crystal has unstable modes\n");
            return kExitInstability;
        }
        guard.commit();
        return 0;
    }
    if (cmd == "verify-md") {
        CrystalSnapshot snap = load_or_solve_modes(cfg, opt, guard);
        IntegratorSettings settings;
        settings.periods = opt.md_periods;
        settings.record_stride = std::max(1, settings.steps_per_period / 10);
        ExcitationSpec exc;
        exc.mode_index = opt.md_mode - 1;
        exc.amplitude = opt.md_amplitude;
        const ModeVerification v =
            verify_mode(snap.trajectory, *snap.modes, exc, snap.drive, settings);
        const std::string path = out_path(opt, "verify_md.csv");
        guard.track(path);
        std::ofstream f(path, std::ios::trunc);
        if (!f) throw IoError("cannot write " + path);
        write_header(f, cfg);
        f << "# probe ion " << v.probe_ion + 1 << " axis " << "xyz"[v.probe_axis] << "\n";
        f << "t_rf_periods,coordinate_md,coordinate_modes,difference\n";
        char buf[160];
        for (std::size_t i = 0; i < v.times.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%.10g,%.17g,%.17g,%.17g\n", v.times[i],
                          v.md_coord[i], v.mode_coord[i], v.md_coord[i] - v.mode_coord[i]);
            f << buf;
        }
        std::printf("verify-md: mode %d amplitude %g -> max deviation %.3g L0 (%s)\n",
                    opt.md_mode, opt.md_amplitude, v.max_deviation, path.c_str());
        guard.commit();
        return 0;
    }

    // the remaining subcommands need the gate context
    CrystalSnapshot snap = load_or_solve_modes(cfg, opt, guard);
    const GateContext ctx = make_gate_context(cfg, snap);

    if (cmd == "design") {
        const CouplingMatrix coupling = build_coupling(ctx);
        const GammaMatrices gammas = build_gamma(ctx);
        auto [pulse, rep] = optimize_pulse(ctx, coupling, gammas);
        if (opt.dump_series_stats)
            std::fprintf(stderr, "series: %ld leaf terms, dropped bound %.3g\n",
                         coupling.terms + gammas.terms,
                         coupling.dropped_bound + gammas.dropped_bound);
        const std::string pulse_path = out_path(opt, "pulse.csv");
        const std::string report_path = out_path(opt, "gate_report.txt");
        guard.track(pulse_path);
        guard.track(report_path);
        write_pulse_csv(pulse_path, cfg, ctx, pulse);
        write_report(report_path, cfg, ctx, rep, pulse);
        std::printf("design: theta=%+.12f delta_F=%.3g max|alpha|=%.3g -> %s\n", rep.theta,
                    rep.delta_f, rep.max_alpha_abs, pulse_path.c_str());
        guard.commit();
        return 0;
    }
    if (cmd == "scan") {
        if (opt.grid.empty()) throw ConfigError("scan needs --grid MIN:MAX:STEP (in MHz)");
        std::vector<double> grid_mhz = parse_grid(opt.grid);
        std::vector<double> grid;
        for (double v : grid_mhz) grid.push_back(2.0 * pi * 1e6 * v);
        const auto points = scan_detuning(ctx, grid, opt.threads);
        const std::string path = out_path(opt, "scan.csv");
        guard.track(path);
        std::ofstream f(path, std::ios::trunc);
        if (!f) throw IoError("cannot write " + path);
        write_header(f, cfg);
        f << "mu_rad_s,delta_F,Theta_rad,max_alpha_abs,status\n";
        char buf[240];
        for (const auto& p : points) {
            std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%s\n", p.mu_rad_s,
                          p.delta_f, p.theta, p.max_alpha_abs, p.status.c_str());
            f << buf;
        }
        std::printf("scan: %zu detunings -> %s\n", points.size(), path.c_str());
        guard.commit();
        return 0;
    }
    if (cmd == "robust") {
        RobustSettings settings;
        const RobustDesign rd = design_robust(ctx, settings);
        const std::string pulse_path = out_path(opt, "robust_pulse.csv");
        const std::string report_path = out_path(opt, "robust_report.txt");
        const std::string sens_path = out_path(opt, "robust_sensitivity.csv");
        guard.track(pulse_path);
        guard.track(report_path);
        guard.track(sens_path);
        write_pulse_csv(pulse_path, cfg, ctx, rd.pulse);
        write_report(report_path, cfg, ctx, rd.report, rd.pulse);

        // sensitivity table: fixed pulses under detuning drift
        const CouplingMatrix coupling = build_coupling(ctx);
        const GammaMatrices gammas = build_gamma(ctx);
        auto [plain, plain_rep] = optimize_pulse(ctx, coupling, gammas);
        std::ofstream f(sens_path, std::ios::trunc);
        if (!f) throw IoError("cannot write " + sens_path);
        write_header(f, cfg);
        f << "dmu_rad_s,delta_F_robust,delta_F_standard\n";
        const double mu0 = ctx.mu / ctx.units.time_s;
        char buf[200];
        for (int i = -5; i <= 5; ++i) {
            const double dmu = i * 2.0 * pi * 200.0;  // 200 Hz steps
            const GateContext shifted = ctx.with_detuning(mu0 + dmu);
            const CouplingMatrix ca = build_coupling(shifted);
            const GammaMatrices ga = build_gamma(shifted);
            const GateReport rr = evaluate_with(shifted, ca, ga, rd.pulse, shifted.t0);
            const GateReport rs = evaluate_with(shifted, ca, ga, plain, shifted.t0);
            std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", dmu, rr.delta_f, rs.delta_f);
            f << buf;
        }
        std::printf("robust: delta_F=%.3g (plain %.3g) cost=%.3g -> %s\n", rd.report.delta_f,
                    plain_rep.delta_f, rd.diagnostics.cost, pulse_path.c_str());
        guard.commit();
        return 0;
    }
    if (cmd == "t0-scan") {
        const CouplingMatrix coupling = build_coupling(ctx);
        const GammaMatrices gammas = build_gamma(ctx);
        auto [pulse, rep] = optimize_pulse(ctx, coupling, gammas);
        const double period_s = 2.0 * pi / snap.drive.rf_rad_s;
        std::vector<double> grid;
        const int steps = std::max(2, opt.t0_steps);
        for (int i = 0; i <= steps; ++i) grid.push_back(i * period_s / steps);
        const auto points = scan_start_offset(ctx, pulse, grid, opt.threads);
        const std::string path = out_path(opt, "t0_scan.csv");
        guard.track(path);
        std::ofstream f(path, std::ios::trunc);
        if (!f) throw IoError("cannot write " + path);
        write_header(f, cfg);
        f << "t0_s,delta_F,Theta_rad,max_alpha_abs\n";
        char buf[200];
        double mean_f = 0.0;
        for (const auto& p : points) {
            std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\n", p.t0_s, p.delta_f,
                          p.theta, p.max_alpha_abs);
            f << buf;
            mean_f += p.delta_f;
        }
        std::printf("t0-scan: %zu offsets, mean delta_F=%.3g -> %s\n", points.size(),
                    mean_f / points.size(), path.c_str());
        guard.commit();
        return 0;
    }
    throw ConfigError("unknown subcommand: " + cmd);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Paul-trap crystal dynamics and entangling-gate design"};
    app.require_subcommand(1);

    Options opt;
    const std::vector<std::string> names = {"equilibrium", "modes", "verify-md", "design",
                                            "scan",        "robust", "t0-scan"};
    for (const auto& name : names) {
        CLI::App* sub = app.add_subcommand(name);
        sub->add_option("--config", opt.config_path, "config file")->required();
        sub->add_option("--out", opt.out_dir, "output directory");
        sub->add_option("--seed", opt.seed, "random seed");
        sub->add_option("--threads", opt.threads, "worker threads");
        sub->add_option("--precision", opt.precision, "series precision override");
        sub->add_option("--fourier-order", opt.fourier_order, "equilibrium harmonics override");
        sub->add_option("--phase-order", opt.phase_order, "phase harmonics override");
        sub->add_option("--ncut", opt.ncut, "mode sideband order override");
        if (name == "scan") sub->add_option("--grid", opt.grid, "detuning grid MIN:MAX:STEP in MHz");
        if (name == "verify-md") {
            sub->add_option("--mode", opt.md_mode, "mode index (1-based, sorted by frequency)");
            sub->add_option("--amplitude", opt.md_amplitude, "excitation amplitude");
            sub->add_option("--periods", opt.md_periods, "RF periods to integrate");
        }
        if (name == "design")
            sub->add_flag("--dump-series-stats", opt.dump_series_stats,
                          "print series term counts");
        if (name == "t0-scan")
            sub->add_option("--t0-steps", opt.t0_steps, "grid points over one RF period");
    }

    CLI11_PARSE(app, argc, argv);

    const std::string cmd = app.get_subcommands().front()->get_name();
    try {
        return run(cmd, opt);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "iongate: config error: %s\n", e.what());
        return kExitConfig;
    } catch (const IoError& e) {
        std::fprintf(stderr, "iongate: %s\n", e.what());
        return kExitConfig;
    } catch (const InstabilityError& e) {
        std::fprintf(stderr, "iongate: instability: %s\n", e.what());
        return kExitInstability;
    } catch (const ConvergenceError& e) {
        std::fprintf(stderr, "iongate: no convergence: %s\n", e.what());
        return kExitConvergence;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "iongate: %s\n", e.what());
        return kExitOther;
    }
}
