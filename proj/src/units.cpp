#include "iongate/units.hpp"

#include <cmath>

namespace iongate {

UnitSystem build_units(const IonSpecies& species, const TrapDrive& drive) {
    species.validate();
    drive.validate();
    const auto& c = codata();
    const double z = static_cast<double>(species.charge);
    const double coulomb = z * z * c.elementary_charge * c.elementary_charge /
                           (4.0 * pi * c.epsilon0);
    UnitSystem u;
    u.length_m = std::cbrt(coulomb / (species.mass_kg * drive.rf_rad_s * drive.rf_rad_s));
    u.time_s = 2.0 / drive.rf_rad_s;
    u.frequency_rad_s = drive.rf_rad_s / 2.0;
    u.energy_J = species.mass_kg * u.length_m * u.length_m / (u.time_s * u.time_s);
    return u;
}

double to_dimensionless(double value, Dim dim, const UnitSystem& u) {
    switch (dim) {
        case Dim::length: return value / u.length_m;
        case Dim::time: return value / u.time_s;
        case Dim::angular_frequency: return value / u.frequency_rad_s;
    }
    throw ConfigError("unknown dimension tag");
}

double to_physical(double value, Dim dim, const UnitSystem& u) {
    switch (dim) {
        case Dim::length: return value * u.length_m;
        case Dim::time: return value * u.time_s;
        case Dim::angular_frequency: return value * u.frequency_rad_s;
    }
    throw ConfigError("unknown dimension tag");
}

double delta_k_counterprop(double wavelength_m) {
    if (!(wavelength_m > 0.0)) throw ConfigError("wavelength must be positive");
    return 2.0 * (2.0 * pi / wavelength_m);
}

double lamb_dicke(double delta_k, double mass_kg, double omega_rad_s) {
    return delta_k * std::sqrt(codata().hbar / (2.0 * mass_kg * omega_rad_s));
}

}  // namespace iongate
