#include "pnp/reactions.hpp"

#include <cmath>

#include "pnp/errors.hpp"

namespace pnp {

namespace {

double monomial(const std::vector<ReactionSpecies>& side,
                const std::vector<double>& c) {
    double prod = 1.0;
    for (std::size_t j = 0; j < side.size(); ++j) {
        if (c[j] < 0.0)
            throw ConfigError("rate_density: negative concentration for " +
                              side[j].id);
        prod *= std::pow(c[j], side[j].nu);
    }
    return prod;
}

double monomial_derivative(const std::vector<ReactionSpecies>& side,
                           const std::vector<double>& c, std::size_t index) {
    double prod = 1.0;
    for (std::size_t j = 0; j < side.size(); ++j) {
        if (c[j] < 0.0)
            throw ConfigError("rate_density: negative concentration for " +
                              side[j].id);
        if (j == index) {
            const double nu = side[j].nu;
            if (nu == 1.0)
                continue; // factor d(c)/dc = 1
            prod *= nu * std::pow(c[j], nu - 1.0);
        } else {
            prod *= std::pow(c[j], side[j].nu);
        }
    }
    return prod;
}

} // namespace

int ReactionSpec::electron_count() const {
    double n = 0.0;
    for (const auto& s : products) n += s.z * s.nu;
    for (const auto& s : reactants) n -= s.z * s.nu;
    return static_cast<int>(std::lround(n));
}

double rate_density(const ReactionSpec& spec, const ReactionState& c) {
    if (c.reactant_c.size() != spec.reactants.size() ||
        c.product_c.size() != spec.products.size())
        throw ConfigError("rate_density: state size mismatch");
    return spec.k_f * monomial(spec.reactants, c.reactant_c) -
           spec.k_r * monomial(spec.products, c.product_c);
}

double rate_density_derivative(const ReactionSpec& spec,
                               const ReactionState& c, bool reactant_side,
                               std::size_t index) {
    if (reactant_side)
        return spec.k_f *
               monomial_derivative(spec.reactants, c.reactant_c, index);
    return -spec.k_r * monomial_derivative(spec.products, c.product_c, index);
}

double species_rate(const ReactionSpec& spec, const std::string& species_id,
                    const ReactionState& c) {
    const double r = rate_density(spec, c);
    double total = 0.0;
    for (const auto& s : spec.reactants)
        if (s.id == species_id) total += -s.nu * r;
    for (const auto& s : spec.products)
        if (s.id == species_id) total += s.nu * r;
    return total;
}

double check_mass_conservation(const ReactionSpec& spec,
                               const ReactionState& c) {
    return stoichiometric_mass_imbalance(spec) * rate_density(spec, c);
}

double stoichiometric_mass_imbalance(const ReactionSpec& spec) {
    double sum = 0.0;
    for (const auto& s : spec.reactants) sum -= s.molar_mass * s.nu;
    for (const auto& s : spec.products) sum += s.molar_mass * s.nu;
    return sum;
}

} // namespace pnp
