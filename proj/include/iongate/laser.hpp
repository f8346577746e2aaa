#pragma once

#include <Eigen/Dense>

#include "iongate/constants.hpp"
#include "iongate/errors.hpp"

namespace iongate {

/// Bichromatic Raman drive on a pair of target ions.
struct LaserConfig {
    double delta_k = 0.0;           // 1/m
    Eigen::Vector3d direction = Eigen::Vector3d::UnitX();  // unit vector
    double detuning_rad_s = 0.0;    // mu
    double gate_time_s = 0.0;       // tau
    int n_segments = 1;
    int ion_a = 0;                  // 0-based target indices
    int ion_b = 1;
    double static_phase_rad = 0.0;
    double start_offset_s = 0.0;    // t0
    double omega_max_rad_s = 0.0;   // Rabi bound; 0 disables the check

    void validate() const {
        if (ion_a == ion_b) throw ConfigError("laser target ions must differ");
        if (!(gate_time_s > 0.0)) throw ConfigError("gate time must be positive");
        if (n_segments < 1) throw ConfigError("segment count must be >= 1");
        if (!(delta_k > 0.0)) throw ConfigError("delta_k must be positive");
        if (std::abs(direction.norm() - 1.0) > 1e-12)
            throw ConfigError("laser direction must be a unit vector");
    }
};

/// Thermal phonon occupations at a fixed temperature.  The Doppler limit
/// k_B T = hbar Gamma / 2 is accepted as an alternative input.
struct ThermalSpectrum {
    double temperature_K = 0.0;

    static ThermalSpectrum from_temperature(double t_kelvin) {
        if (t_kelvin < 0.0) throw ConfigError("temperature must be >= 0");
        return ThermalSpectrum{t_kelvin};
    }
    static ThermalSpectrum from_doppler(double gamma_rad_s) {
        if (!(gamma_rad_s > 0.0)) throw ConfigError("linewidth must be positive");
        const auto& c = codata();
        return ThermalSpectrum{c.hbar * gamma_rad_s / (2.0 * c.k_boltzmann)};
    }

    double nbar(double omega_rad_s) const {
        if (!(omega_rad_s > 0.0)) throw ConfigError("nbar needs omega > 0");
        if (temperature_K == 0.0) return 0.0;
        const auto& c = codata();
        const double x = c.hbar * omega_rad_s / (c.k_boltzmann * temperature_K);
        return 1.0 / std::expm1(x);
    }
};

/// Truncation orders shared by the series machinery.
struct TruncationSettings {
    int fourier_order = 5;      // M, equilibrium harmonics
    int phase_order = 5;        // L, motional-phase harmonics
    int sideband_order = 5;     // n_cut, mode sideband harmonics
    double precision = 1e-8;    // series tolerance
    int bessel_cutoff = 20;     // n_max

    void validate() const {
        if (fourier_order < 0 || phase_order < 0 || sideband_order < 0)
            throw ConfigError("truncation orders must be >= 0");
        if (!(precision > 0.0 && precision < 1.0))
            throw ConfigError("series precision must lie in (0, 1)");
        if (bessel_cutoff < 1) throw ConfigError("bessel cutoff must be >= 1");
    }
};

}  // namespace iongate
