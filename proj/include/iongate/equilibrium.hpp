#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "iongate/errors.hpp"
#include "iongate/trap.hpp"

namespace iongate {

/// pi-periodic crystal solution as a real cosine series,
///   R_i(t) = B[0] + 2 * sum_{n>=1} B[n] cos(2 n t),
/// one N x 3 coefficient matrix per harmonic.  Realness of the
/// coefficients encodes the time-reversal symmetry R(-t) = R(t).
struct EquilibriumTrajectory {
    int n_ions = 0;
    int order = 0;  // M
    std::vector<Eigen::MatrixXd> b;  // size order+1, each n_ions x 3
    double residual = 0.0;  // max EOM defect over one period
    bool converged = false;

    Eigen::MatrixXd positions(double t) const;
    Eigen::MatrixXd velocities(double t) const;
    Eigen::MatrixXd accelerations(double t) const;
};

/// Uniformly sampled positions over one drive period [0, pi).
struct SampledPeriod {
    std::vector<double> times;
    std::vector<Eigen::MatrixXd> positions;  // n_ions x 3 each
    double mismatch = 0.0;      // period-recurrence defect of the free stage
    double final_damping = 0.0;
    std::uint64_t seed = 0;
};

/// Cosine coefficients of the Coulomb acceleration D and of the pair
/// matrix G, to twice the trajectory order.
struct CoulombSeries {
    std::vector<Eigen::MatrixXd> d;  // each n_ions x 3
    std::vector<Eigen::MatrixXd> g;  // each n_ions x n_ions
    double imag_residue = 0.0;
};

struct IterationSettings {
    double alpha = 1.0;           // iteration mixing, >= 1
    double damping_initial = 0.1;
    double damping_factor = 0.5;
    double damping_floor = 1e-4;
    int stage1_periods = 50;      // N1
    int stage2_periods = 50;      // N2
    // Handoff tolerance of the damped stage.  The damped fixed point sits
    // O(gamma) off the true orbit, so the free-evolution recurrence cannot
    // certify much below damping_floor; final accuracy comes from the
    // Fourier refinement, which only needs a nearby seed.
    double eps_pos = 2e-3;
    double strobe_factor = 0.01;  // stage-1 settles to eps_pos * strobe_factor
    int max_damping_rounds = 40;  // stage-1 repeats per damping value
    int max_outer = 12;           // damping reductions
    int max_sweeps = 60;          // Fourier iteration sweeps
    double eps_change = 1e-12;    // Fourier iteration change tolerance
    double eps_residual = 1e-8;   // certificate threshold
    int steps_per_period = 600;
    double escape_radius = 0.0;   // 0 = auto (scales with N^(1/3))

    void validate() const {
        if (alpha < 1.0) throw ConfigError("iteration mixing must be >= 1");
        if (!(damping_initial > 0.0)) throw ConfigError("damping must be positive");
        if (!(eps_pos > 0.0) || !(eps_change > 0.0) || !(eps_residual > 0.0))
            throw ConfigError("tolerances must be positive");
    }
};

/// Dimensionless Coulomb acceleration 4 * sum_{j != i} (R_i - R_j)/|R_i - R_j|^3.
Eigen::MatrixXd coulomb_acceleration(const Eigen::MatrixXd& positions);

/// Damped-dynamics search for an approximately periodic crystal
/// (random start fixed by the seed, damping reduced until the free
/// evolution recurs to tolerance).  sample_count sets the grid of the
/// returned period.
SampledPeriod find_equilibrium_damped(const TrapDrive& drive, int n_ions,
                                      const IterationSettings& settings,
                                      std::uint64_t seed, int sample_count);

/// Cosine-series analysis of a trajectory's Coulomb terms, to orders
/// +-2M.  The imaginary residue of the transform must stay below
/// imag_tol, otherwise the input broke time-reversal symmetry.
CoulombSeries coulomb_series(const EquilibriumTrajectory& traj, double imag_tol = 1e-9);
CoulombSeries coulomb_series(const SampledPeriod& period, int order, double imag_tol = 1e-6);

/// Initial cosine coefficients from a sampled period (harmonics above the
/// sampling Nyquist are discarded).
EquilibriumTrajectory fourier_from_samples(const SampledPeriod& period, int order);

/// Fourier-iteration refinement of an approximate periodic solution;
/// returns the trajectory with a certified EOM residual.
EquilibriumTrajectory refine_fourier(const EquilibriumTrajectory& initial,
                                     const TrapDrive& drive,
                                     const IterationSettings& settings);

/// Max-norm EOM defect of a trajectory over a uniform period grid.
double eom_residual(const EquilibriumTrajectory& traj, const TrapDrive& drive,
                    int grid_points = 2048);

}  // namespace iongate
