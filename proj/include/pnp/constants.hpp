#pragma once

namespace pnp {

/// Physical constants in SI units. Values default to CODATA; cases may
/// override F, R or T through the configuration file.
struct PhysicalConstants {
    double F = 96485.33;        ///< Faraday constant [C/mol]
    double R = 8.314;           ///< ideal gas constant [J/(mol K)]
    double T = 300.0;           ///< absolute temperature [K]
    double e = 1.602176634e-19; ///< elementary charge [C]
    double k_B = 1.380649e-23;  ///< Boltzmann constant [J/K]
    double N_A = 6.02214076e23; ///< Avogadro number [1/mol]

    /// Thermal voltage RT/F [V].
    double thermal_voltage() const { return R * T / F; }
};

} // namespace pnp
