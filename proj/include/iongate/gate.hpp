#pragma once

#include <array>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "iongate/config.hpp"
#include "iongate/equilibrium.hpp"
#include "iongate/modes.hpp"
#include "iongate/oscint.hpp"

namespace iongate {

/// Everything the pulse optimizer needs, in dimensionless units (time in
/// T0, frequencies in units of rf/2 so the drive period is pi).  Immutable
/// once built; copies with a different detuning or start offset are cheap.
struct GateContext {
    int n_modes = 0;
    std::vector<double> beta;   // mode frequencies
    std::vector<double> eta;    // Lamb-Dicke parameters
    std::vector<double> nbar;   // thermal occupations
    std::array<PhaseSpec, 2> phase;  // driven-ion motional phases (before t0 shift)
    std::vector<std::array<ModulationSpec, 2>> modulation;  // [mode][driven ion]
    double mu = 0.0;
    double tau = 0.0;
    int n_seg = 0;
    double t0 = 0.0;
    double omega_rf = 2.0;
    double omega_max = 0.0;  // Rabi bound, 0 = disabled
    SeriesBudget budget;
    UnitSystem units;
    int ion_a = 0;
    int ion_b = 0;
    // reserved for beam-profile intensity modulation; must stay empty
    std::vector<double> rabi_harmonics;

    GateContext with_detuning(double mu_rad_s) const {
        GateContext c = *this;
        c.mu = mu_rad_s * units.time_s;
        return c;
    }
    GateContext with_start_offset(double t0_s) const {
        GateContext c = *this;
        c.t0 = t0_s / units.time_s;
        return c;
    }
    double segment_length() const { return tau / n_seg; }
};

GateContext build_context(const EquilibriumTrajectory& crystal, const ModeSet& modes,
                          const IonSpecies& species, const TrapDrive& drive,
                          const LaserConfig& laser, const ThermalSpectrum& thermal,
                          const TruncationSettings& trunc);

/// Per-(driven ion, mode) complex row vectors over the segments: the
/// residual displacement of mode k is alpha = row . Omega.
struct CouplingMatrix {
    std::vector<std::array<Eigen::VectorXcd, 2>> rows;      // -i eta * integral
    std::vector<std::array<Eigen::VectorXcd, 2>> integrals;  // raw segment integrals
    double dropped_bound = 0.0;
    long terms = 0;
};

CouplingMatrix build_coupling(const GateContext& ctx);
CouplingMatrix build_coupling_at(const GateContext& ctx, double t0);

/// Two-qubit phase matrices: the complex accumulation Gamma', its
/// imaginary part gamma' (lower triangular by construction) and the
/// symmetrized quadratic form.
struct GammaMatrices {
    Eigen::MatrixXcd gamma_pre;
    Eigen::MatrixXd gamma_prime;
    Eigen::MatrixXd gamma;
    double dropped_bound = 0.0;
    long terms = 0;
};

GammaMatrices build_gamma(const GateContext& ctx);
GammaMatrices build_gamma_at(const GateContext& ctx, double t0);

struct OptimizationProblem {
    Eigen::MatrixXd m;      // Re sum_jk rows^dag rows (2 nbar + 1)
    Eigen::MatrixXd gamma;  // symmetric two-qubit form
};

OptimizationProblem make_problem(const GateContext& ctx, const CouplingMatrix& coupling,
                                 const GammaMatrices& gammas);

struct PulseSequence {
    Eigen::VectorXd omega;  // dimensionless segment amplitudes
    int theta_sign = 1;     // sign of the enforced two-qubit angle
    bool symmetric = false;
    bool bound_exceeded = false;

    Eigen::VectorXd omega_rad_s(const UnitSystem& u) const { return omega / u.time_s; }
};

struct GateReport {
    double theta = 0.0;
    double delta_f = 0.0;
    std::vector<std::array<Complex, 2>> alpha;  // [mode][driven ion]
    std::vector<double> mode_infidelity;
    double max_alpha_abs = 0.0;
    double t0 = 0.0;        // dimensionless
    double lambda = 0.0;    // optimizer multiplier (0 when not from the eigensolve)
    double eigen_residual = 0.0;
    double dropped_bound = 0.0;
};

/// Smallest-|lambda| generalized eigenpair of (M, gamma), rescaled so the
/// two-qubit angle is exactly +-pi/4.
std::pair<PulseSequence, GateReport> optimize_pulse(const GateContext& ctx,
                                                    const CouplingMatrix& coupling,
                                                    const GammaMatrices& gammas);

/// Report for a given pulse using already-assembled matrices.
GateReport evaluate_with(const GateContext& ctx, const CouplingMatrix& coupling,
                         const GammaMatrices& gammas, const PulseSequence& pulse,
                         double t0);

/// Re-evaluate a pulse with all segment boundaries shifted to t0 (seconds).
GateReport evaluate_sequence(const GateContext& ctx, const PulseSequence& pulse,
                             double t0_s);

struct ScanPoint {
    double mu_rad_s = 0.0;
    double delta_f = 0.0;
    double theta = 0.0;
    double max_alpha_abs = 0.0;
    std::string status;  // "ok" or the failure reason
};

std::vector<ScanPoint> scan_detuning(const GateContext& ctx,
                                     const std::vector<double>& mu_rad_s, int n_threads);

struct T0Point {
    double t0_s = 0.0;
    double delta_f = 0.0;
    double theta = 0.0;
    double max_alpha_abs = 0.0;
};

std::vector<T0Point> scan_start_offset(const GateContext& ctx, const PulseSequence& pulse,
                                       const std::vector<double>& t0_s, int n_threads);

/// Robustness-hardened design: time-integral weighted matrices, symmetric
/// pulse reduction, constrained quartic minimization.
struct RobustSettings {
    int multistart = 16;
    int max_newton = 120;
    double tol = 1e-12;
    unsigned rng_seed = 12345;
};

struct RobustDiagnostics {
    double cost = 0.0;            // weighted quartic objective at the solution
    double alpha_integral = 0.0;  // sqrt(Omega^T Mtilde Omega)
    double theta_integral = 0.0;  // Omega^T gammatilde Omega
    int starts_converged = 0;
};

struct RobustDesign {
    PulseSequence pulse;
    GateReport report;
    RobustDiagnostics diagnostics;
};

RobustDesign design_robust(const GateContext& ctx, const RobustSettings& settings);

/// Weighted copies used by the robustness cost; exposed for tests.
Eigen::MatrixXd robust_m_matrix(const GateContext& ctx, const CouplingMatrix& coupling);
Eigen::MatrixXd robust_gamma_matrix(const GateContext& ctx, const GammaMatrices& gammas);

}  // namespace iongate
