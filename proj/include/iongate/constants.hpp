#pragma once

#include <string>

#include "iongate/errors.hpp"

namespace iongate {

/// CODATA 2018 values, in SI units.
struct PhysicalConstants {
    double hbar = 1.054571817e-34;        // J s
    double k_boltzmann = 1.380649e-23;    // J/K
    double elementary_charge = 1.602176634e-19;  // C
    double epsilon0 = 8.8541878128e-12;   // F/m
    double atomic_mass_unit = 1.66053906660e-27;  // kg
};

constexpr double pi = 3.14159265358979323846;

inline const PhysicalConstants& codata() {
    static const PhysicalConstants c;
    return c;
}

struct IonSpecies {
    double mass_kg = 0.0;
    int charge = 1;  // multiples of e
    std::string label;

    void validate() const {
        if (!(mass_kg > 0.0))
            throw ConfigError("ion mass must be positive");
        if (charge < 1)
            throw ConfigError("ion charge must be a positive integer multiple of e");
    }
};

/// 171Yb+, the workhorse species in the examples shipped with this project.
inline IonSpecies ytterbium171() {
    return IonSpecies{170.936330 * codata().atomic_mass_unit, 1, "Yb171"};
}

}  // namespace iongate
