#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include "pnp/errors.hpp"
#include "pnp/physics.hpp"

using namespace pnp;

namespace {

bool log_mentions(const OuterReport& rep, const std::string& field) {
    for (const std::string& line : rep.log)
        if (line.find(field) != std::string::npos) return true;
    return false;
}

} // namespace

TEST_CASE("body-forced periodic channel recovers Poiseuille flow") {
    SideKinds sides;
    sides.left = sides.right = PatchKind::periodic;
    const double H = 1e-6, mu = 10.0, Jx = -1e13;
    const auto mesh = build_rectangle_mesh(8, 64, 8.0 * H, H, sides);
    RegionState st = make_region(mesh, RegionKind::fluid, "channel");
    st.mu = mu;

    StepControls ctl;
    ctl.time_scheme = TimeScheme::steady;
    ctl.J = {Jx, 0.0};
    const OuterReport rep = pimple_outer_loop(st, ctl);
    CHECK(rep.converged);
    CHECK(rep.max_divergence <= 1e-10);
    CHECK(log_mentions(rep, "u_x"));
    CHECK(log_mentions(rep, "p"));

    const double a = -Jx / (2.0 * mu); // u = a y (H - y), peak a H^2 / 4
    double umax = 0.0, uy_max = 0.0, err = 0.0;
    for (Index c = 0; c < mesh.n_cells(); ++c) {
        const double y = mesh.cell_centres[c][1];
        umax = std::max(umax, st.u.x.v[c]);
        uy_max = std::max(uy_max, std::abs(st.u.y.v[c]));
        err = std::max(err, std::abs(st.u.x.v[c] - a * y * (H - y)));
    }
    const double peak = a * H * H / 4.0;
    CHECK(peak == doctest::Approx(0.125));
    CHECK(umax == doctest::Approx(peak).epsilon(5e-3));
    CHECK(err <= 2e-3 * peak);
    CHECK(uy_max <= 1e-8 * peak);
}

TEST_CASE("potential solves") {
    SUBCASE("charge-free Dirichlet gap is linear to solver accuracy") {
        const auto mesh = build_rectangle_mesh(32, 4, 1.0, 0.125);
        RegionState st = make_region(mesh, RegionKind::solid, "slab");
        st.eps = 8.854e-12;
        st.phi_bc[mesh.patch_id("left")] = {BCKind::dirichlet, 0.0};
        st.phi_bc[mesh.patch_id("right")] = {BCKind::dirichlet, 1.0};
        compile_static_bcs(st);
        SolveControls ctl;
        ctl.rel_tol = 1e-13;
        ctl.abs_tol = 1e-300; // SI residual scale sits far below 1e-14
        ctl.max_iters = 10000;
        REQUIRE(solve_potential(st, ctl).converged);
        for (Index c = 0; c < mesh.n_cells(); ++c)
            CHECK(std::abs(st.phi.v[c] - mesh.cell_centres[c][0]) <= 1e-10);
    }
    SUBCASE("uniform charge gives the parabolic profile") {
        const int n = 64;
        const auto mesh = build_rectangle_mesh(n, 2, 1.0, 2.0 / n);
        RegionState st = make_region(mesh, RegionKind::fluid, "gap");
        st.eps = 1.0;
        st.phi_bc[mesh.patch_id("left")] = {BCKind::dirichlet, 0.0};
        st.phi_bc[mesh.patch_id("right")] = {BCKind::dirichlet, 0.0};
        compile_static_bcs(st);
        add_species(st, {"ion", 1e-9, 1, 0.0}, 1.0 / 96485.33);
        SolveControls ctl;
        ctl.rel_tol = 1e-12;
        ctl.abs_tol = 1e-300;
        ctl.max_iters = 10000;
        REQUIRE(solve_potential(st, ctl).converged);
        // eps phi'' = -rho with rho = 1: phi = x (1 - x) / 2, peak 1/8
        double err = 0.0;
        for (Index c = 0; c < mesh.n_cells(); ++c) {
            const double x = mesh.cell_centres[c][0];
            err = std::max(err, std::abs(st.phi.v[c] - 0.5 * x * (1.0 - x)));
        }
        CHECK(err <= 1e-3 * 0.125);
    }
    SUBCASE("all-Neumann potential is a configuration error") {
        const auto mesh = build_rectangle_mesh(8, 8, 1.0, 1.0);
        RegionState st = make_region(mesh, RegionKind::fluid, "box");
        st.eps = 1.0;
        SolveControls ctl;
        CHECK_THROWS_AS(solve_potential(st, ctl), ConfigError);
    }
}

TEST_CASE("fixed field relaxes species to the discrete Boltzmann state") {
    const int n = 200;
    const auto mesh = build_rectangle_mesh(1, n, 1.0 / n, 1.0);
    RegionState st = make_region(mesh, RegionKind::fluid, "cell");
    st.eps = 1e12; // charge feedback negligible: phi stays linear
    st.phi_bc[mesh.patch_id("bottom")] = {BCKind::dirichlet, 0.0};
    st.phi_bc[mesh.patch_id("top")] = {BCKind::dirichlet, 0.01};
    compile_static_bcs(st);
    const int i = add_species(st, {"cation", 1.0, 1, 0.0}, 1.0);

    StepControls ctl;
    ctl.frozen_flow = true;
    ctl.time_scheme = TimeScheme::euler;
    ctl.dt = 0.02;
    ctl.convection = ConvectionScheme::linear;
    ctl.linear.rel_tol = 1e-12;
    ctl.linear.abs_tol = 1e-300;

    const double m0 = total_moles(st, i);
    double worst_drift = 0.0;
    OuterReport last;
    for (int step = 0; step < 600; ++step) {
        last = pimple_outer_loop(st, ctl);
        worst_drift =
            std::max(worst_drift, std::abs(total_moles(st, i) - m0) / m0);
        advance_history(st);
    }
    CHECK(worst_drift <= 1e-10);
    CHECK_FALSE(log_mentions(last, "u_x"));
    CHECK(log_mentions(last, "cation"));

    const PhysicalConstants pc;
    double kmin = 1e300, kmax = 0.0;
    for (Index c = 0; c < mesh.n_cells(); ++c) {
        const double k =
            st.c[i].v[c] * std::exp(pc.F * st.phi.v[c] / (pc.R * pc.T));
        kmin = std::min(kmin, k);
        kmax = std::max(kmax, k);
    }
    CHECK(kmax / kmin - 1.0 <= 1e-3);

    // migration velocity points down the potential gradient for a cation
    const VectorField v = migration_velocity(st, i);
    for (Index c = 0; c < mesh.n_cells(); ++c) CHECK(v.y.v[c] < 0.0);
}

TEST_CASE("electroneutral potential reproduces the liquid junction") {
    const int n = 400;
    const auto mesh = build_rectangle_mesh(n, 2, 1.0, 2.0 / n);
    RegionState st = make_region(mesh, RegionKind::fluid, "junction");
    const double D1 = 2.0, D2 = 1.0;
    const int i1 = add_species(st, {"fast", D1, 1, 0.0}, 1.0);
    const int i2 = add_species(st, {"slow", D2, -1, 0.0}, 1.0);
    for (std::size_t p = 0; p < mesh.patches.size(); ++p) {
        st.c_bc[i1][p] = {BCKind::zero_gradient, 0.0};
        st.c_bc[i2][p] = {BCKind::zero_gradient, 0.0};
    }
    for (Index c = 0; c < mesh.n_cells(); ++c) {
        const double cc = 1.0 + mesh.cell_centres[c][0];
        st.c[i1].v[c] = cc;
        st.c[i2].v[c] = cc;
    }
    SolveControls ctl;
    ctl.rel_tol = 1e-10; // round-off floor sits near 1e-11 for this scaling
    REQUIRE(solve_electroneutral_potential(st, ctl).converged);

    const PhysicalConstants pc;
    const double coef =
        -(pc.R * pc.T / pc.F) * (D1 - D2) / (D1 + D2);
    double worst = 0.0;
    for (int ix = 0; ix + 1 < n; ++ix) {
        const double dphi = (st.phi.v[ix + 1] - st.phi.v[ix]) / mesh.dx;
        const double xf = (ix + 1) * mesh.dx;
        const double expected = coef / (1.0 + xf); // (ln c)' = 1 / (1 + x)
        worst = std::max(worst, std::abs(dphi - expected) /
                                    std::abs(expected));
    }
    CHECK(worst <= 0.01);
}

TEST_CASE("electroneutral closure requires a charged last species") {
    const auto mesh = build_rectangle_mesh(4, 1, 1.0, 1.0);
    RegionState st = make_region(mesh, RegionKind::fluid, "box");
    add_species(st, {"a", 1.0, 1, 0.0}, 1.0);
    add_species(st, {"b", 1.0, 0, 0.0}, 1.0);
    CHECK_THROWS_AS(electroneutral_closure(st), ConfigError);
    st.species[1].z = -1;
    electroneutral_closure(st);
    for (Index c = 0; c < mesh.n_cells(); ++c)
        CHECK(st.c[1].v[c] == doctest::Approx(1.0));
}

TEST_CASE("flow solves reject solid regions") {
    const auto mesh = build_rectangle_mesh(4, 4, 1.0, 1.0);
    RegionState st = make_region(mesh, RegionKind::solid, "rock");
    SolveControls ctl;
    CHECK_THROWS_AS(momentum_predict(st, {0.0, 0.0}, ctl), ConfigError);
}

TEST_CASE("closed electrolyte conserves moles under the applied bias") {
    const int n = 125;
    const double L = 1e-6;
    const auto mesh = build_rectangle_mesh(n, 1, L, L / n);
    RegionState st = make_region(mesh, RegionKind::fluid, "cell");
    st.eps = 6.042e-13;
    st.phi_bc[mesh.patch_id("left")] = {BCKind::dirichlet, 0.0};
    st.phi_bc[mesh.patch_id("right")] = {BCKind::dirichlet, 0.1};
    compile_static_bcs(st);
    const double c0 = 1e-3;
    const int i1 = add_species(st, {"cation", 1e-6, 1, 0.0}, c0);
    const int i2 = add_species(st, {"anion", 1e-6, -1, 0.0}, c0);

    StepControls ctl;
    ctl.frozen_flow = true;
    ctl.time_scheme = TimeScheme::euler;
    ctl.dt = 1e-7;
    ctl.max_outer = 1000; // the first step from the uniform state is stiffest
    ctl.linear.rel_tol = 1e-12;
    ctl.linear.abs_tol = 1e-300;

    const double m1 = total_moles(st, i1), m2 = total_moles(st, i2);
    for (int step = 0; step < 10; ++step) {
        const OuterReport rep = pimple_outer_loop(st, ctl);
        CHECK(rep.converged);
        CHECK(std::abs(total_moles(st, i1) - m1) / m1 <= 1e-10);
        CHECK(std::abs(total_moles(st, i2) - m2) / m2 <= 1e-10);
        advance_history(st);
    }
    // layers form at the electrodes without any undershoot aborting above
    CHECK(st.c[i1].v[0] > c0);
    CHECK(st.c[i2].v[n - 1] > c0);
    for (Index c = 0; c < mesh.n_cells(); ++c) {
        CHECK(st.c[i1].v[c] >= 0.0);
        CHECK(st.c[i2].v[c] >= 0.0);
    }
}

TEST_CASE("restricted reactive interface couples two regions") {
    const int n = 8;
    const double kf = 10.0, kr = 100.0;
    const auto fluid_mesh = build_rectangle_mesh(n, 1, 1.0, 1.0);
    const auto solid_mesh = build_rectangle_mesh(n, 1, 1.0, 1.0);
    std::vector<RegionState> regions;
    regions.push_back(make_region(fluid_mesh, RegionKind::fluid, "fluid"));
    regions.push_back(make_region(solid_mesh, RegionKind::solid, "solid"));
    const int sf = add_species(regions[0], {"c_f", 1.0, 0, 0.0}, 1.0);
    const int ss = add_species(regions[1], {"c_s", 1.0, 0, 0.0}, 0.0);
    const int pf = fluid_mesh.patch_id("right");
    const int ps = solid_mesh.patch_id("left");

    RegionInterface link;
    link.region_a = 0;
    link.region_b = 1;
    link.patch_a = pf;
    link.patch_b = ps;
    link.species = {SpeciesLink{sf, ss, kf, kr, true}};

    StepControls ctl;
    ctl.frozen_flow = true;
    ctl.time_scheme = TimeScheme::euler;
    ctl.dt = 0.02;
    ctl.linear.rel_tol = 1e-13;
    ctl.linear.abs_tol = 1e-300;

    double balance_worst = 0.0;
    for (int step = 0; step < 700; ++step) {
        const MultiRegionReport rep =
            multi_region_step(regions, {link}, ctl, 60, 1e-12);
        CHECK(rep.converged);
        if (step % 50 == 7) {
            // outward fluxes of the two sides cancel: exchanged mass balances
            const double ff = patch_species_flux(regions[0], pf, sf)[0];
            const double fs = patch_species_flux(regions[1], ps, ss)[0];
            const double scale = std::max({std::abs(ff), std::abs(fs), 1e-3});
            balance_worst =
                std::max(balance_worst, std::abs(ff + fs) / scale);
        }
    }
    CHECK(balance_worst <= 1e-8);

    const double cf_face = regions[0].c[sf].bv[pf][0];
    const double cs_face = regions[1].c[ss].bv[ps][0];
    CHECK(cf_face / cs_face == doctest::Approx(kf / kr).epsilon(1e-6));
    CHECK(regions[0].c[sf].v[0] == doctest::Approx(cf_face).epsilon(1e-5));
    CHECK(regions[1].c[ss].v[n - 1] == doctest::Approx(cs_face).epsilon(1e-5));
    const double mass =
        total_moles(regions[0], sf) + total_moles(regions[1], ss);
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-8));
}
