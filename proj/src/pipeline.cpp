#include "iongate/pipeline.hpp"

namespace iongate {

CrystalSnapshot solve_crystal(const SimulationConfig& cfg, std::uint64_t seed) {
    const std::string unstable = single_ion_instability(cfg.drive);
    if (!unstable.empty()) throw InstabilityError(unstable);

    IterationSettings settings;
    settings.eps_residual = std::min(1e-8, cfg.truncation.precision);
    const int m = cfg.truncation.fourier_order;
    const int samples = 8 * (2 * m + 1);

    const SampledPeriod period =
        find_equilibrium_damped(cfg.drive, cfg.n_ions, settings, seed, samples);
    const EquilibriumTrajectory initial = fourier_from_samples(period, m);
    CrystalSnapshot snap;
    snap.config_hash = cfg.config_hash;
    snap.seed = seed;
    snap.species = cfg.species;
    snap.drive = cfg.drive;
    snap.truncation = cfg.truncation;
    snap.trajectory = refine_fourier(initial, cfg.drive, settings);
    if (!snap.trajectory.converged)
        throw ConvergenceError("refined trajectory residual " +
                               std::to_string(snap.trajectory.residual) +
                               " above the certificate threshold");
    return snap;
}

void attach_modes(CrystalSnapshot& snap, int n_threads) {
    const int order = std::max(3, snap.truncation.sideband_order);
    const HessianSeries h = build_hessian_series(snap.trajectory, snap.drive, order);
    RefineSettings settings;
    settings.block_order = order;
    settings.n_threads = n_threads;
    ModeSet set = solve_modes(h, snap.truncation.sideband_order, settings);
    set.crystal_hash = trajectory_hash(snap.trajectory);
    snap.modes = std::move(set);
}

GateContext make_gate_context(const SimulationConfig& cfg, const CrystalSnapshot& snap) {
    if (!cfg.laser) throw ConfigError("config has no [laser] section");
    if (!snap.modes) throw ConfigError("snapshot carries no mode set; run the mode stage");
    return build_context(snap.trajectory, *snap.modes, snap.species, snap.drive, *cfg.laser,
                         cfg.thermal, cfg.truncation);
}

}  // namespace iongate
