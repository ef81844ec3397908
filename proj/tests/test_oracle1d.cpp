#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "pnp/analysis.hpp"
#include "pnp/banded.hpp"
#include "pnp/errors.hpp"
#include "pnp/oracle1d.hpp"

using namespace pnp;

TEST_CASE("banded LU matches dense elimination") {
    const int n = 40, kl = 3, ku = 2;
    std::mt19937 rng(17);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    BandedMatrix A(n, kl, ku);
    std::vector<std::vector<double>> dense(n, std::vector<double>(n, 0.0));
    for (int i = 0; i < n; ++i)
        for (int j = std::max(0, i - kl); j <= std::min(n - 1, i + ku); ++j) {
            const double v = U(rng) + (i == j ? 3.0 : 0.0);
            A.at(i, j) = v;
            dense[i][j] = v;
        }
    std::vector<double> x_ref(n), b(n, 0.0);
    for (int i = 0; i < n; ++i) x_ref[i] = U(rng);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) b[i] += dense[i][j] * x_ref[j];
    A.solve(b);
    for (int i = 0; i < n; ++i)
        CHECK(b[i] == doctest::Approx(x_ref[i]).epsilon(1e-10));
}

TEST_CASE("finite-difference weights reproduce classic stencils") {
    const auto w1 = fd_weights(0.0, {-1.0, 0.0, 1.0}, 1);
    CHECK(w1[0] == doctest::Approx(-0.5));
    CHECK(w1[1] == doctest::Approx(0.0));
    CHECK(w1[2] == doctest::Approx(0.5));
    const auto w2 = fd_weights(0.0, {-2, -1, 0, 1, 2}, 2);
    CHECK(w2[0] == doctest::Approx(-1.0 / 12));
    CHECK(w2[1] == doctest::Approx(16.0 / 12));
    CHECK(w2[2] == doctest::Approx(-30.0 / 12));
    // weights differentiate polynomials up to the stencil degree exactly
    const auto w = fd_weights(0.3, {-1.0, -0.2, 0.5, 1.1, 2.0}, 2);
    double acc = 0.0;
    for (std::size_t k = 0; k < w.size(); ++k) {
        const double x = std::vector<double>{-1.0, -0.2, 0.5, 1.1, 2.0}[k];
        acc += w[k] * (x * x * x);
    }
    CHECK(acc == doctest::Approx(6 * 0.3).epsilon(1e-10));
}

TEST_CASE("channel oracle limits") {
    SUBCASE("uncharged limit decouples to pure Poiseuille") {
        ChannelProblem p;
        p.phi_top = 0.0;
        p.z = 0; // no charge coupling: phi harmonic between equal walls
        p.nodes = 801;
        const auto s = solve_channel(p);
        double umax = 0.0;
        for (double v : s.u) umax = std::max(umax, v);
        CHECK(umax == doctest::Approx(0.125).epsilon(1e-6));
        for (int i = 0; i < p.nodes; ++i) {
            CHECK(std::abs(s.phi[i]) <= 1e-12);
            CHECK(s.c[i] == doctest::Approx(p.c_mean).epsilon(1e-12));
            const double y = s.y[i];
            CHECK(s.u[i] ==
                  doctest::Approx(y * (p.H - y) / (2.0 * p.H * p.H))
                      .epsilon(1e-6));
        }
    }
    SUBCASE("large-permittivity limit: linear potential, Boltzmann c") {
        ChannelProblem p;
        p.eps = 1.0; // charge density negligible against eps phi''
        p.nodes = 801;
        const auto s = solve_channel(p);
        PhysicalConstants pc;
        for (int i = 0; i < p.nodes; ++i) {
            const double lin = p.phi_top * s.y[i] / p.H;
            CHECK(s.phi[i] == doctest::Approx(lin).epsilon(5e-7));
        }
        // Boltzmann relation holds exactly by construction; spot-check shape
        const double ratio = s.c.front() / s.c.back();
        const double expected =
            std::exp(pc.F * p.phi_top / (pc.R * p.T));
        CHECK(ratio == doctest::Approx(expected).epsilon(1e-4));
    }
}

TEST_CASE("channel oracle self-convergence under node doubling") {
    ChannelProblem p;
    p.nodes = 1001;
    const auto coarse = solve_channel(p);
    p.nodes = 2001;
    const auto fine = solve_channel(p);
    double rel = 0.0;
    for (int i = 0; i < 1001; ++i) {
        const int j = 2 * i;
        rel = std::max(rel, std::abs(coarse.phi[i] - fine.phi[j]) /
                                std::max(1e-30, std::abs(fine.phi[j]) + 1e-3));
        rel = std::max(rel, std::abs(coarse.c[i] - fine.c[j]) /
                                (std::abs(fine.c[j]) + 1e-12));
    }
    CHECK(rel < 1e-8);
}

TEST_CASE("channel oracle satisfies the continuous equations") {
    ChannelProblem p;
    p.nodes = 2001;
    const auto s = solve_channel(p);
    PhysicalConstants pc;
    const double h = p.H / (p.nodes - 1);
    // independent 6th-order stencil residual of the Poisson balance
    double res_max = 0.0;
    for (int i = 4; i < p.nodes - 4; ++i) {
        std::vector<double> xs(7);
        for (int k = 0; k < 7; ++k) xs[k] = (k - 3) * h;
        const auto w = fd_weights(0.0, xs, 2);
        double d2 = 0.0;
        for (int k = 0; k < 7; ++k) d2 += w[k] * s.phi[i - 3 + k];
        res_max = std::max(res_max,
                           std::abs(p.eps * d2 + pc.F * s.c[i]));
    }
    CHECK(res_max / (pc.F * p.c_mean) < 1e-6);
    // mean concentration matches the prescribed gauge
    CHECK(simpson_mass(s.y, s.c) / p.H ==
          doctest::Approx(p.c_mean).epsilon(1e-10));
    // wall-normal momentum balance: p = RT c up to the gauge
    for (int i = 0; i < p.nodes; ++i)
        CHECK(s.p[i] == doctest::Approx(pc.R * p.T * (s.c[i] - s.c[0]))
                            .epsilon(1e-12));
}

TEST_CASE("two-species oracle") {
    SUBCASE("neutral species stay uniform") {
        TwoSpeciesProblem p;
        p.z1 = p.z2 = 0;
        p.u = 0.0; // advection against no-flux walls would tilt the profile
        p.nodes = 201;
        p.dt = 1e-7;
        const auto s = solve_two_species(p);
        for (int i = 0; i < p.nodes; ++i) {
            CHECK(s.c1[i] == doctest::Approx(p.c_init).epsilon(1e-9));
            CHECK(s.c2[i] == doctest::Approx(p.c_init).epsilon(1e-9));
        }
    }
    SUBCASE("charged run conserves mass and builds wall layers") {
        TwoSpeciesProblem p;
        p.nodes = 801;
        p.dt = 2e-8;
        const auto s = solve_two_species(p);
        const double expected = p.c_init * p.L;
        CHECK(std::abs(s.mass1 - expected) / expected < 1e-10);
        CHECK(std::abs(s.mass2 - expected) / expected < 1e-10);
        // z=+1 accumulates at the grounded (low phi) wall, z=-1 opposite
        CHECK(s.c1.front() > 2.0 * p.c_init);
        CHECK(s.c2.back() > 2.0 * p.c_init);
        // accumulation confined within ~3 Debye lengths of each wall
        ReferenceScales sc;
        sc.c_bar = {p.c_init, p.c_init};
        sc.z = {1, -1};
        const double lam = debye_length(p.eps, p.T, ionic_strength(sc));
        for (int i = 0; i < p.nodes; ++i) {
            const double d = std::min(s.x[i], p.L - s.x[i]);
            if (d > 3.0 * lam) {
                CHECK(s.c1[i] < 1.6 * p.c_init);
                CHECK(s.c2[i] < 1.6 * p.c_init);
            }
        }
    }
}

TEST_CASE("reactive interface oracle") {
    SUBCASE("zero rate constants decouple the domains") {
        ReactiveInterfaceProblem p;
        p.k_f = p.k_r = 0.0;
        p.nodes_per_side = 401;
        const auto s = solve_reactive_interface(p);
        CHECK(s.interface_flux == doctest::Approx(0.0));
        for (double v : s.c_s) CHECK(v == 0.0);
        CHECK(simpson_mass(s.x_f, s.c_f) ==
              doctest::Approx(0.1253314).epsilon(1e-4));
    }
    SUBCASE("steady state matches the closed form") {
        ReactiveInterfaceProblem p;
        p.nodes_per_side = 1001;
        const auto s = solve_reactive_interface(p);
        // c_f = C exp(x), c_s = 10 C, C = M0 / (1 - 1/e + 10)
        const double M0 = 0.12533141373155;
        const double C = M0 / (1.0 - std::exp(-1.0) + 10.0);
        for (int i = 0; i < p.nodes_per_side; ++i) {
            CHECK(s.c_f[i] ==
                  doctest::Approx(C * std::exp(s.x_f[i])).epsilon(1e-8));
            CHECK(s.c_s[i] == doctest::Approx(10.0 * C).epsilon(1e-8));
        }
        CHECK(s.c_f.back() / s.c_s.front() == doctest::Approx(0.1).epsilon(1e-10));
        CHECK(std::abs(s.interface_flux) < 1e-10);
        const double mass =
            simpson_mass(s.x_f, s.c_f) + simpson_mass(s.x_s, s.c_s);
        CHECK(mass == doctest::Approx(M0).epsilon(1e-10));
    }
}
