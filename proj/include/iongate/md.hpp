#pragma once

#include <vector>

#include <Eigen/Dense>

#include "iongate/equilibrium.hpp"
#include "iongate/modes.hpp"
#include "iongate/trap.hpp"

namespace iongate {

struct IntegratorSettings {
    int steps_per_period = 1000;
    int periods = 1000;
    int record_stride = 0;  // 0 = record every step

    void validate() const {
        if (steps_per_period < 100)
            throw ConfigError("integrator needs >= 100 steps per period");
        if (periods < 1) throw ConfigError("need at least one period");
    }
};

struct ExcitationSpec {
    int mode_index = 0;   // 0-based into the sorted mode set
    double amplitude = 0.01;
};

struct MdState {
    Eigen::MatrixXd r;
    Eigen::MatrixXd v;
};

struct MdTrace {
    std::vector<double> times;                  // dimensionless
    std::vector<Eigen::MatrixXd> positions;
};

/// Fourth-order symplectic composition of velocity-Verlet steps for the
/// full nonlinear EOM.  dt may be negative for backward integration.
MdState integrate(const MdState& initial, const TrapDrive& drive, double t_start,
                  double t_end, int steps, MdTrace* trace = nullptr,
                  int record_stride = 1);

/// Mode-expansion displacement/velocity at time t for a real amplitude.
Eigen::MatrixXd mode_displacement(const NormalMode& mode, double amplitude, double t,
                                  int n_ions);
Eigen::MatrixXd mode_velocity(const NormalMode& mode, double amplitude, double t,
                              int n_ions);

struct ModeVerification {
    double max_deviation = 0.0;   // L0 units, probed coordinate
    int probe_ion = 0;
    int probe_axis = 0;
    std::vector<double> times;        // RF periods
    std::vector<double> md_coord;     // L0 units
    std::vector<double> mode_coord;   // L0 units
};

/// Excite one normal mode on top of the periodic solution, integrate the
/// full EOM, and compare against the mode-expansion prediction at every
/// step.  The probed coordinate is the largest carrier component of the
/// mode (trace rows are thinned by record_stride).
ModeVerification verify_mode(const EquilibriumTrajectory& traj, const ModeSet& modes,
                             const ExcitationSpec& exc, const TrapDrive& drive,
                             const IntegratorSettings& settings);

}  // namespace iongate
