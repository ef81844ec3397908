#pragma once

#include <string>
#include <vector>

#include "pnp/constants.hpp"

namespace pnp {

/// Reference scales the dimensionless groups are built from.
/// T defaults to 300 K; the source material never states a temperature and
/// 300 K reproduces its N = F φ̄ / RT values exactly.
struct ReferenceScales {
    double L = 1.0;        ///< m
    double U = 0.0;        ///< m/s
    double phi_bar = 0.0;  ///< V
    std::vector<double> c_bar; ///< mol/m³ per species
    std::vector<int> z;        ///< valence per species
    std::vector<double> D;     ///< m²/s per species
    double T = 300.0;      ///< K
    double mu = 0.0;       ///< Pa·s
    double eps = 0.0;      ///< F/m
    double k_f = 0.0;      ///< interface forward rate constant (m/s)
    double k_r = 0.0;      ///< interface reverse rate constant (m/s)
};

struct DimensionlessReport {
    double N = 0.0;            ///< F φ̄ / RT
    std::vector<double> Pe;    ///< U L / D_i
    double L_nd = 0.0;         ///< λ_D / L
    double L_nd_sq = 0.0;      ///< L_nd²
    double P = 0.0;            ///< 2 F L φ̄ C̄ / (μ U)
    double lambda_D = 0.0;     ///< m
    double Da_f = 0.0;         ///< k_f L / D_1
    double Da_r = 0.0;         ///< k_r L / D_1
    double C_bar = 0.0;        ///< ionic strength, mol/m³
    std::vector<std::string> undefined; ///< names of groups with zero denominators

    bool defined(const std::string& name) const;
    std::string table() const;
};

/// C̄ = ½ Σ z_i² c̄_i
double ionic_strength(const ReferenceScales& s);

DimensionlessReport dimensionless_numbers(const ReferenceScales& s,
                                          const PhysicalConstants& pc = {});

/// λ_D = sqrt(ε k_B T / (2 N_A e² C̄))
double debye_length(double eps, double T, double C_bar,
                    const PhysicalConstants& pc = {});

} // namespace pnp
