#pragma once

#include <cstdint>

#include "iongate/gate.hpp"
#include "iongate/snapshot.hpp"

namespace iongate {

/// Damped search plus Fourier refinement for the configured crystal.
/// Checks single-ion stability of the drive first.
CrystalSnapshot solve_crystal(const SimulationConfig& cfg, std::uint64_t seed);

/// Hessian series and full Floquet mode solve; attaches the mode set to
/// the snapshot.
void attach_modes(CrystalSnapshot& snap, int n_threads = 1);

/// Gate context from a snapshot that already carries modes.
GateContext make_gate_context(const SimulationConfig& cfg, const CrystalSnapshot& snap);

}  // namespace iongate
