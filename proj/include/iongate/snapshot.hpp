#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "iongate/config.hpp"
#include "iongate/equilibrium.hpp"
#include "iongate/modes.hpp"

namespace iongate {

/// Persisted crystal solution: drive, provenance and the Fourier
/// coefficients; the mode set is appended by the mode stage.  Values are
/// written with 17 significant digits so doubles round-trip exactly.
struct CrystalSnapshot {
    int format_version = 1;
    std::string config_hash;
    std::uint64_t seed = 0;
    IonSpecies species;
    TrapDrive drive;
    TruncationSettings truncation;
    EquilibriumTrajectory trajectory;
    std::optional<ModeSet> modes;

    UnitSystem units() const { return build_units(species, drive); }
};

void write_snapshot(const std::string& path, const CrystalSnapshot& snap);
CrystalSnapshot read_snapshot(const std::string& path);

/// Deterministic digest of the trajectory coefficients, used to tie a mode
/// set to the crystal it was computed from.
std::string trajectory_hash(const EquilibriumTrajectory& traj);

}  // namespace iongate
