#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "pnp/boundary.hpp"
#include "pnp/discretization.hpp"
#include "pnp/errors.hpp"
#include "pnp/linsolve.hpp"
#include "pnp/mesh.hpp"

using namespace pnp;

TEST_CASE("robin alpha formulas") {
    SUBCASE("zero gradient") {
        const auto a = robin_alphas(zero_gradient_coeffs(), 3.7);
        CHECK(a.a1 == doctest::Approx(1.0));
        CHECK(a.a2 == doctest::Approx(0.0));
        CHECK(a.a3 == doctest::Approx(0.0));
        CHECK(a.a4 == doctest::Approx(0.0));
    }
    SUBCASE("fixed value") {
        const double g = -2.5;
        const auto a = robin_alphas(dirichlet_coeffs(g), 4.0);
        CHECK(a.a1 == doctest::Approx(0.0));
        CHECK(a.a2 == doctest::Approx(g));
    }
    SUBCASE("unit coefficients") {
        const auto a = robin_alphas({1.0, 1.0, 1.0}, 2.0);
        CHECK(a.a1 == doctest::Approx(2.0));
        CHECK(a.a2 == doctest::Approx(1.0));
        CHECK(a.a3 == doctest::Approx(2.0));
        CHECK(a.a4 == doctest::Approx(2.0));
    }
    SUBCASE("degenerate denominator names the patch") {
        CHECK_THROWS_WITH_AS(robin_alphas({1.0, 2.0, 0.0}, 2.0, "patch lid"),
                             doctest::Contains("lid"), BoundaryError);
    }
}

TEST_CASE("alphas satisfy the effective condition for any cell value") {
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> U(-2.0, 2.0);
    for (int trial = 0; trial < 200; ++trial) {
        RobinCoeffs c{U(rng), U(rng), U(rng)};
        const double B = std::abs(U(rng)) + 0.1;
        if (std::abs(c.D_star * B - c.K_star) < 1e-2) continue;
        const auto a = robin_alphas(c, B);
        const double cc = U(rng);
        const double face = a.a1 * cc + a.a2;
        const double grad = a.a3 * cc + a.a4;
        // -D* grad = -K* face - F*, and grad equals B (face - cell)
        const double lhs = -c.D_star * grad;
        const double rhs = -c.K_star * face - c.F_star;
        const double scale = std::abs(lhs) + std::abs(rhs) + 1.0;
        CHECK(std::abs(lhs - rhs) <= 1e-13 * scale);
        CHECK(grad == doctest::Approx(B * (face - cc)).epsilon(1e-12));
    }
}

TEST_CASE("fixed gradient condition reproduces the requested slope") {
    const double B = 8.0;
    const auto a = robin_alphas(fixed_gradient_coeffs(0.75), B);
    const double cc = 1.3;
    CHECK(a.a3 * cc + a.a4 == doctest::Approx(0.75));
    CHECK(a.a1 * cc + a.a2 == doctest::Approx(cc + 0.75 / B));
}

TEST_CASE("null reaction reduces the restricted condition to transport") {
    const RateEval r0{}; // r = 0, zero derivatives
    const double u_n = 0.4, drift = 0.15;
    const auto c = reactive_restricted_fluid(2.0, 3.0, 5.0, 0.7, 0.2, 0.3,
                                             u_n, drift, r0);
    CHECK(c.D_star == doctest::Approx(2.0));
    CHECK(c.K_star == doctest::Approx(u_n - drift));
    CHECK(c.F_star == doctest::Approx(0.0));
}

TEST_CASE("linear rate gives iterate-independent coefficients") {
    const double kf = 10.0, kr = 100.0;
    auto rate_at = [&](double cs, double cf) {
        return RateEval{kf * cs - kr * cf, kf, -kr};
    };
    const auto c1 = reactive_restricted_fluid(1.0, 1.0, 4.0, 0.6, 0.2, 0.5,
                                              0.0, 0.0, rate_at(0.2, 0.5));
    const auto c2 = reactive_restricted_fluid(1.0, 1.0, 4.0, 0.6, 3.1, -1.2,
                                              0.0, 0.0, rate_at(3.1, -1.2));
    CHECK(c1.K_star == doctest::Approx(c2.K_star).epsilon(1e-13));
    CHECK(c1.F_star == doctest::Approx(c2.F_star).epsilon(1e-13));

    // one Newton update is exact: the face value stops moving immediately
    const double B_f = 4.0, c_cell = 0.8;
    double cf_face = 0.0, cs_face = 0.6;
    double prev = 1e300;
    for (int it = 0; it < 3; ++it) {
        const auto rc = reactive_restricted_fluid(
            1.0, 1.0, 4.0, 0.6, cs_face, cf_face, 0.0, 0.0,
            rate_at(cs_face, cf_face));
        const auto a = robin_alphas(rc, B_f);
        const double next = a.a1 * c_cell + a.a2;
        if (it >= 1) CHECK(std::abs(next - prev) <= 1e-14 * (1.0 + std::abs(next)));
        prev = cf_face = next;
    }
}

TEST_CASE("unrestricted condition with no reaction is flux+value continuity") {
    InterfaceFaceState s;
    s.B_other = 6.0;
    s.c_other_cell = 1.1;
    const auto c = reactive_unrestricted(2.0, 3.0, s, 0.0, 0.0);
    const auto ref = two_sided_diffusive_coeffs(2.0, 3.0, 6.0, 1.1);
    CHECK(c.D_star == doctest::Approx(ref.D_star));
    CHECK(c.K_star == doctest::Approx(ref.K_star));
    CHECK(c.F_star == doctest::Approx(ref.F_star));

    // equal diffusivities and spacing: the face value is the two-cell mean
    const auto a = robin_alphas(reactive_unrestricted(2.0, 2.0, s, 0.0, 0.0),
                                s.B_other);
    const double cc = 0.7;
    CHECK(a.a1 * cc + a.a2 == doctest::Approx(0.5 * (cc + s.c_other_cell)));
}

TEST_CASE("unrestricted condition with self-independent rate") {
    InterfaceFaceState s;
    s.B_other = 2.0;
    s.c_other_cell = 0.4;
    s.u_dot_nprime = 0.3;
    s.drift = -0.1;
    const double D = 1.5, D_other = 2.5, r_i = 0.8;
    const auto c = reactive_unrestricted(D, D_other, s, r_i, 0.0);
    CHECK(c.D_star == doctest::Approx(D));
    CHECK(c.K_star ==
          doctest::Approx(s.u_dot_nprime - D_other * s.B_other - s.drift));
    CHECK(c.F_star == doctest::Approx(D_other * s.B_other * s.c_other_cell - r_i));
}

TEST_CASE("unrestricted fluxes balance the interface rate") {
    // Uncharged, quiescent: at the face value implied by the alphas, the
    // own-side diffusive outflow plus the partner-side outflow equals r_i.
    // Two species with opposite rates then exchange mass exactly.
    std::mt19937 rng(9);
    std::uniform_real_distribution<double> U(0.2, 2.0);
    for (int trial = 0; trial < 50; ++trial) {
        InterfaceFaceState s;
        s.B_other = U(rng);
        s.c_other_cell = U(rng);
        const double D = U(rng), D_other = U(rng), B_own = U(rng);
        const double r1 = U(rng) - 1.0;
        double total = 0.0;
        for (double r_i : {r1, -r1}) {
            const auto a = robin_alphas(reactive_unrestricted(D, D_other, s, r_i, 0.0),
                                        B_own);
            const double cc = U(rng);
            const double face = a.a1 * cc + a.a2;
            const double own_out = -D * (a.a3 * cc + a.a4);
            const double other_out = -D_other * s.B_other * (face - s.c_other_cell);
            CHECK(own_out + other_out == doctest::Approx(r_i).epsilon(1e-11));
            total += own_out + other_out;
        }
        CHECK(std::abs(total) <= 1e-11);
    }
}

TEST_CASE("reactive interface relaxes to the rate-law equilibrium") {
    // Two 1D domains exchanging one species through a linear interface rate
    // r = kf c_s - kr c_f (outward flux of the solid side). Zero-flux outer
    // walls; transient stepping to steady state must end with
    // c_f / c_s = kf / kr = 0.1 at the interface and conserved total mass.
    const double kf = 10.0, kr = 100.0, D = 1.0, dt = 0.02;
    const int n = 8;
    const auto fluid = build_rectangle_mesh(n, 1, 1.0, 1.0);
    const auto solid = build_rectangle_mesh(n, 1, 1.0, 1.0);
    // interface is the right end of "fluid" and the left end of "solid"
    const int pf = fluid.patch_id("right");
    const int ps = solid.patch_id("left");
    const double Bf = fluid.patches[pf].B[0];
    const double Bs = solid.patches[ps].B[0];
    const Index cf_cell = fluid.faces[fluid.patches[pf].faces[0]].owner;
    const Index cs_cell = solid.faces[solid.patches[ps].faces[0]].owner;

    Field cf(fluid, "c_f", 1.0), cs(solid, "c_s", 0.0);
    double cf_face = 1.0, cs_face = 0.0;
    auto bcs_f = FieldBCs::zero_gradient(fluid);
    auto bcs_s = FieldBCs::zero_gradient(solid);

    LinearSystem sys_f(fluid), sys_s(solid);
    const auto gamma_f = FaceScalar::uniform(fluid, D);
    const auto gamma_s = FaceScalar::uniform(solid, D);
    for (int step = 0; step < 700; ++step) {
        const auto cf_old = cf.v;
        const auto cs_old = cs.v;
        // outer iterations make the interface coefficients consistent with
        // the end-of-step cell values, which is what conserves mass
        for (int outer = 0; outer < 10; ++outer) {
            const RateEval rate{kf * cs_face - kr * cf_face, kf, -kr};
            bcs_f.patches[pf].alphas[0] = robin_alphas(
                reactive_restricted_fluid(D, D, Bs, cs.v[cs_cell], cs_face,
                                          cf_face, 0.0, 0.0, rate),
                Bf);
            bcs_s.patches[ps].alphas[0] = robin_alphas(
                reactive_restricted_solid(D, D, Bf, cf.v[cf_cell], cs_face,
                                          cf_face, 0.0, 0.0, rate),
                Bs);
            auto advance = [&](LinearSystem& sys, const StructuredMesh& mesh,
                               const FaceScalar& gamma, const FieldBCs& bcs,
                               Field& c, const std::vector<double>& old) {
                sys.reset();
                add_laplacian(sys, mesh, gamma, bcs);
                add_ddt(sys, mesh, TimeScheme::euler, dt, old);
                SolveControls ctl;
                ctl.rel_tol = 1e-12;
                solve(sys, c.v, ctl);
            };
            advance(sys_f, fluid, gamma_f, bcs_f, cf, cf_old);
            advance(sys_s, solid, gamma_s, bcs_s, cs, cs_old);
            cf_face = bcs_f.patches[pf].alphas[0].a1 * cf.v[cf_cell] +
                      bcs_f.patches[pf].alphas[0].a2;
            cs_face = bcs_s.patches[ps].alphas[0].a1 * cs.v[cs_cell] +
                      bcs_s.patches[ps].alphas[0].a2;
        }
    }

    CHECK(cf_face / cs_face == doctest::Approx(kf / kr).epsilon(1e-6));
    // equilibrium is uniform on each side at the face ratio
    CHECK(cf.v[0] == doctest::Approx(cf_face).epsilon(1e-5));
    CHECK(cs.v[n - 1] == doctest::Approx(cs_face).epsilon(1e-5));
    double mass = 0.0;
    for (Index c = 0; c < fluid.n_cells(); ++c)
        mass += cf.v[c] * fluid.cell_volumes[c];
    for (Index c = 0; c < solid.n_cells(); ++c)
        mass += cs.v[c] * solid.cell_volumes[c];
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("quasi-periodic jump drives a linear ramp") {
    SideKinds k;
    k.left = k.right = PatchKind::periodic;
    const auto mesh = build_rectangle_mesh(16, 1, 1.0, 1.0, k);
    auto bcs = FieldBCs::zero_gradient(mesh);

    SUBCASE("zero jump recovers plain periodicity") {
        LinearSystem sys(mesh);
        add_laplacian(sys, mesh, FaceScalar::uniform(mesh, 1.0), bcs);
        sys.set_identity_row(0, 2.0);
        std::vector<double> phi(mesh.n_cells(), 0.0);
        SolveControls c;
        c.rel_tol = 1e-12;
        REQUIRE(solve(sys, phi, c).converged);
        for (double v : phi) CHECK(v == doctest::Approx(2.0).epsilon(1e-9));
    }

    SUBCASE("fixed jump gives a ramp with the prescribed total drop") {
        const double jump = 1e-2; // value at left inlet exceeds right outlet
        bcs.link_jump[0] = jump;
        LinearSystem sys(mesh);
        add_laplacian(sys, mesh, FaceScalar::uniform(mesh, 1.0), bcs);
        sys.set_identity_row(0, 0.0);
        std::vector<double> phi(mesh.n_cells(), 0.0);
        SolveControls c;
        c.rel_tol = 1e-12;
        REQUIRE(solve(sys, phi, c).converged);
        const double slope = (phi[1] - phi[0]) / mesh.dx;
        CHECK(slope == doctest::Approx(-jump / mesh.Lx).epsilon(1e-8));
        for (int i = 2; i < 16; ++i)
            CHECK(phi[i] - phi[i - 1] ==
                  doctest::Approx(phi[1] - phi[0]).epsilon(1e-7));
    }
}

TEST_CASE("boundary value refresh follows the active condition") {
    const auto mesh = build_rectangle_mesh(4, 1, 1.0, 1.0);
    auto bcs = FieldBCs::zero_gradient(mesh);
    const int left = mesh.patch_id("left");
    bcs.patches[left].alphas[0] =
        robin_alphas(dirichlet_coeffs(9.0), mesh.patches[left].B[0]);
    Field f(mesh, "c", 3.0);
    update_boundary_values(mesh, bcs, f);
    CHECK(f.bv[left][0] == doctest::Approx(9.0));
    const int right = mesh.patch_id("right");
    CHECK(f.bv[right][0] == doctest::Approx(3.0));
}
