#pragma once

#include "iongate/constants.hpp"
#include "iongate/trap.hpp"

namespace iongate {

/// Natural scales of the dimensionless equations of motion.  All solver
/// internals work in these units; physical values appear only at the I/O
/// boundary.
struct UnitSystem {
    double length_m = 0.0;       // L0 = (e^2 Z^2 / 4 pi eps0 m w_rf^2)^(1/3)
    double time_s = 0.0;         // T0 = 2 / w_rf
    double frequency_rad_s = 0.0;  // w_rf / 2; dimensionless w = w * T0
    double energy_J = 0.0;       // m L0^2 / T0^2
};

UnitSystem build_units(const IonSpecies& species, const TrapDrive& drive);

enum class Dim { length, time, angular_frequency };

double to_dimensionless(double value, Dim dim, const UnitSystem& u);
double to_physical(double value, Dim dim, const UnitSystem& u);

/// Effective wavevector difference for counter-propagating beams,
/// |dk| = 2 * (2 pi / lambda).
double delta_k_counterprop(double wavelength_m);

/// Lamb-Dicke parameter dk * sqrt(hbar / 2 m w).
double lamb_dicke(double delta_k, double mass_kg, double omega_rad_s);

}  // namespace iongate
