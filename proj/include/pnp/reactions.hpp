#pragma once

#include <string>
#include <vector>

namespace pnp {

enum class ReactionLocus { bulk, interface_ };

/// One participant of an elementary reaction. `nu` is the (positive)
/// stoichiometric coefficient; the reactant/product role fixes the sign
/// alpha applied in species_rate.
struct ReactionSpecies {
    std::string id;
    double nu = 1.0;      ///< stoichiometric coefficient, > 0
    int z = 0;            ///< valence
    double molar_mass = 0.0; ///< kg/mol
};

/// Elementary reversible reaction governed by the law of mass action.
/// Units: k_f/k_r per the locus (volumetric or surface rate constants);
/// rate density comes out as mol/m³/s (bulk) or mol/m²/s (interface).
struct ReactionSpec {
    std::vector<ReactionSpecies> reactants;
    std::vector<ReactionSpecies> products;
    double k_f = 0.0;
    double k_r = 0.0;
    ReactionLocus locus = ReactionLocus::interface_;

    /// electrons released: Σ_prod z ν − Σ_reac z ν
    int electron_count() const;
};

/// Concentration lookup by species id, in reaction-participant order:
/// first all reactants, then all products.
struct ReactionState {
    std::vector<double> reactant_c;
    std::vector<double> product_c;
};

/// r' = k_f Π c_reac^ν − k_r Π c_prod^ν. Throws on negative concentrations.
double rate_density(const ReactionSpec& spec, const ReactionState& c);

/// ∂r'/∂c for one participant (analytic monomial derivative).
double rate_density_derivative(const ReactionSpec& spec,
                               const ReactionState& c, bool reactant_side,
                               std::size_t index);

/// r_i = α_i ν_i r' with α = −1 for reactants, +1 for products;
/// unknown ids return 0.
double species_rate(const ReactionSpec& spec, const std::string& species_id,
                    const ReactionState& c);

/// Σ_i m_i α_i ν_i r' — zero for stoichiometrically balanced reactions.
double check_mass_conservation(const ReactionSpec& spec,
                               const ReactionState& c);

/// Σ_i m_i α_i ν_i (state independent); case validation rejects nonzero.
double stoichiometric_mass_imbalance(const ReactionSpec& spec);

} // namespace pnp
