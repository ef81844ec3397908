#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "pnp/errors.hpp"
#include "pnp/reactions.hpp"

using namespace pnp;

namespace {

ReactionSpec binary_interface(double kf, double kr, double m_s = 1.0,
                              double m_f = 1.0) {
    ReactionSpec spec;
    spec.reactants = {{"s", 1.0, 0, m_s}};
    spec.products = {{"f", 1.0, 0, m_f}};
    spec.k_f = kf;
    spec.k_r = kr;
    spec.locus = ReactionLocus::interface_;
    return spec;
}

} // namespace

TEST_CASE("law of mass action rate density") {
    SUBCASE("symmetric equilibrium") {
        ReactionSpec spec;
        spec.reactants = {{"a", 1.0, 0, 1.0}, {"b", 1.0, 0, 1.0}};
        spec.products = {{"c", 1.0, 0, 2.0}};
        spec.k_f = spec.k_r = 3.0;
        CHECK(rate_density(spec, {{1.0, 1.0}, {1.0}}) == doctest::Approx(0.0));
    }
    SUBCASE("quadratic reactant") {
        ReactionSpec spec;
        spec.reactants = {{"a", 2.0, 0, 1.0}};
        spec.products = {{"b", 2.0, 0, 1.0}};
        spec.k_f = 2.0;
        spec.k_r = 0.0;
        CHECK(rate_density(spec, {{3.0}, {0.0}}) == doctest::Approx(18.0));
    }
    SUBCASE("chemical equilibrium point") {
        ReactionSpec spec = binary_interface(10.0, 100.0);
        CHECK(rate_density(spec, {{0.1}, {0.01}}) == doctest::Approx(0.0));
    }
    SUBCASE("negative concentrations rejected") {
        ReactionSpec spec = binary_interface(1.0, 1.0);
        CHECK_THROWS_AS(rate_density(spec, {{-0.1}, {0.0}}), ConfigError);
    }
}

TEST_CASE("signed per-species rates") {
    ReactionSpec spec;
    spec.reactants = {{"a", 1.0, 0, 2.0}};
    spec.products = {{"b", 2.0, 0, 1.0}};
    spec.k_f = 2.0;
    spec.k_r = 0.0;
    const ReactionState st{{3.0}, {1.0}}; // r' = 6
    CHECK(species_rate(spec, "a", st) == doctest::Approx(-6.0));
    CHECK(species_rate(spec, "b", st) == doctest::Approx(12.0));
    CHECK(species_rate(spec, "inert", st) == doctest::Approx(0.0));
}

TEST_CASE("stoichiometric mass balance") {
    SUBCASE("A -> 2B with halved molar mass balances") {
        ReactionSpec spec;
        spec.reactants = {{"a", 1.0, 0, 2.0}};
        spec.products = {{"b", 2.0, 0, 1.0}};
        spec.k_f = 5.0;
        CHECK(stoichiometric_mass_imbalance(spec) == doctest::Approx(0.0));
        CHECK(check_mass_conservation(spec, {{1.7}, {0.4}}) ==
              doctest::Approx(0.0));
    }
    SUBCASE("A -> B with mismatched masses is imbalanced") {
        ReactionSpec spec;
        spec.reactants = {{"a", 1.0, 0, 2.0}};
        spec.products = {{"b", 1.0, 0, 1.0}};
        spec.k_f = 1.0;
        const ReactionState st{{1.0}, {0.0}}; // r' = 1
        CHECK(stoichiometric_mass_imbalance(spec) == doctest::Approx(-1.0));
        CHECK(check_mass_conservation(spec, st) == doctest::Approx(-1.0));
    }
    SUBCASE("surface exchange with equal masses balances for all states") {
        const ReactionSpec spec = binary_interface(10.0, 100.0);
        std::mt19937 rng(1);
        std::uniform_real_distribution<double> U(0.0, 2.0);
        for (int k = 0; k < 20; ++k)
            CHECK(check_mass_conservation(spec, {{U(rng)}, {U(rng)}}) ==
                  doctest::Approx(0.0));
    }
}

TEST_CASE("electron count from valence bookkeeping") {
    ReactionSpec spec;
    spec.reactants = {{"Fe2", 1.0, 2, 0.056}};
    spec.products = {{"Fe3", 1.0, 3, 0.056}};
    CHECK(spec.electron_count() == 1);
    ReactionSpec neutral = binary_interface(1.0, 1.0);
    CHECK(neutral.electron_count() == 0);
}

TEST_CASE("analytic rate derivatives match finite differences") {
    ReactionSpec spec;
    spec.reactants = {{"a", 2.0, 1, 1.0}, {"b", 1.0, -1, 1.0}};
    spec.products = {{"c", 3.0, 0, 1.0}};
    spec.k_f = 1.7;
    spec.k_r = 0.6;
    std::mt19937 rng(8);
    std::uniform_real_distribution<double> U(0.2, 2.0);
    for (int trial = 0; trial < 30; ++trial) {
        ReactionState st{{U(rng), U(rng)}, {U(rng)}};
        auto fd = [&](bool reac, std::size_t j) {
            const double h = 1e-6;
            ReactionState hi = st, lo = st;
            (reac ? hi.reactant_c : hi.product_c)[j] += h;
            (reac ? lo.reactant_c : lo.product_c)[j] -= h;
            return (rate_density(spec, hi) - rate_density(spec, lo)) / (2 * h);
        };
        for (std::size_t j = 0; j < 2; ++j)
            CHECK(rate_density_derivative(spec, st, true, j) ==
                  doctest::Approx(fd(true, j)).epsilon(1e-6));
        CHECK(rate_density_derivative(spec, st, false, 0) ==
              doctest::Approx(fd(false, 0)).epsilon(1e-6));
    }
}
