#pragma once

#include <optional>
#include <string>

#include "iongate/constants.hpp"
#include "iongate/laser.hpp"
#include "iongate/trap.hpp"
#include "iongate/units.hpp"

namespace iongate {

/// Full simulation input parsed from a config file.  Sections [ion] and
/// [trap] are mandatory; [laser] and [thermal] are needed only for gate
/// design, [truncation] always has defaults.
struct SimulationConfig {
    IonSpecies species;
    int n_ions = 0;
    TrapDrive drive;
    std::optional<LaserConfig> laser;
    ThermalSpectrum thermal;
    TruncationSettings truncation;
    std::string config_hash;  // 16 hex digits over the raw file bytes

    UnitSystem units() const { return build_units(species, drive); }
};

SimulationConfig parse_config_text(const std::string& text);
SimulationConfig parse_config_file(const std::string& path);

/// FNV-1a 64-bit hash, rendered as 16 hex digits.
std::string content_hash(const std::string& bytes);

}  // namespace iongate
