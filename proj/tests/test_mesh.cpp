#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>

#include "pnp/errors.hpp"
#include "pnp/mesh.hpp"

using namespace pnp;

TEST_CASE("rectangle mesh basic geometry") {
    const auto m = build_rectangle_mesh(1, 4, 1e-6, 1e-6);
    CHECK(m.n_cells() == 4);
    CHECK(m.dy == doctest::Approx(2.5e-7).epsilon(1e-14));
    CHECK(m.patches.size() == 4);
    for (const Patch& p : m.patches)
        for (double b : p.B) CHECK(b > 0.0);
}

TEST_CASE("outward face-area vectors close every cell") {
    const auto m = build_rectangle_mesh(2, 2, 1.0, 1.0);
    std::vector<std::array<double, 2>> sum(m.n_cells(), {0.0, 0.0});
    double scale = 0.0;
    for (const Face& f : m.faces) {
        scale = std::max(scale, f.area);
        sum[f.owner][0] += f.area * f.normal[0];
        sum[f.owner][1] += f.area * f.normal[1];
        if (f.neighbour >= 0) {
            sum[f.neighbour][0] -= f.area * f.normal[0];
            sum[f.neighbour][1] -= f.area * f.normal[1];
        }
    }
    for (const auto& s : sum) {
        CHECK(std::abs(s[0]) <= 1e-14 * scale);
        CHECK(std::abs(s[1]) <= 1e-14 * scale);
    }
}

TEST_CASE("boundary faces partition into patches") {
    const auto m = build_rectangle_mesh(3, 5, 1.0, 2.0);
    std::map<Index, int> owner_patch;
    for (const Patch& p : m.patches)
        for (Index f : p.faces) {
            CHECK(owner_patch.count(f) == 0);
            owner_patch[f] = 1;
        }
    CHECK(static_cast<Index>(owner_patch.size()) ==
          static_cast<Index>(m.faces.size()) - m.n_internal);
}

TEST_CASE("periodic channel mesh pairs side patches") {
    SideKinds k;
    k.left = k.right = PatchKind::periodic;
    const auto m = build_rectangle_mesh(100, 320, 1e-6, 1e-6, k);
    const Patch* left = m.find_patch("left");
    const Patch* right = m.find_patch("right");
    REQUIRE(left != nullptr);
    REQUIRE(right != nullptr);
    CHECK(left->size() == 320);
    CHECK(right->size() == 320);
    CHECK(left->partner_patch == m.patch_id("right"));
    CHECK(m.periodic_links.size() == 320);
    for (const PeriodicLink& l : m.periodic_links) {
        const Face& fa = m.faces[l.face_a];
        const Face& fb = m.faces[l.face_b];
        CHECK(std::abs(fa.centre[1] - fb.centre[1]) <= 1e-12 * m.dy);
    }
}

TEST_CASE("invalid mesh extents are rejected") {
    CHECK_THROWS_AS(build_rectangle_mesh(0, 4, 1.0, 1.0), ConfigError);
    CHECK_THROWS_AS(build_rectangle_mesh(4, 4, -1.0, 1.0), ConfigError);
}

TEST_CASE("pair_periodic validates face counts") {
    auto m = build_rectangle_mesh(3, 4, 1.0, 1.0);
    CHECK_THROWS_AS(pair_periodic(m, "left", "bottom"), ConfigError);
    const auto map = pair_periodic(m, "left", "right");
    CHECK(map.size() == 4);
    auto m2 = build_rectangle_mesh(2, 2, 1.0, 1.0);
    const auto map2 = pair_periodic(m2, "left", "right");
    CHECK(map2[0] == 0);
    CHECK(map2[1] == 1);
}

TEST_CASE("random porous labelling") {
    RandomFieldSpec spec;
    spec.seed = 7;
    spec.correlation_length = 0.08;
    spec.threshold = 0.0;

    SUBCASE("zero threshold keeps everything fluid") {
        auto m = build_rectangle_mesh(20, 20, 1.0, 1.0);
        generate_random_porous(m, spec);
        CHECK(porosity(m) == doctest::Approx(1.0));
    }

    SUBCASE("identical spec is deterministic") {
        auto m1 = build_rectangle_mesh(30, 30, 1.0, 1.0);
        auto m2 = build_rectangle_mesh(30, 30, 1.0, 1.0);
        spec.threshold = 0.4;
        generate_random_porous(m1, spec);
        generate_random_porous(m2, spec);
        CHECK(m1.region_label == m2.region_label);
    }

    SUBCASE("porosity tracks the threshold quantile") {
        spec.threshold = 0.5;
        for (std::uint64_t seed = 0; seed < 10; ++seed) {
            auto m = build_rectangle_mesh(100, 100, 1.0, 1.0);
            spec.seed = seed;
            generate_random_porous(m, spec);
            CHECK(porosity(m) >= 0.48);
            CHECK(porosity(m) <= 0.52);
        }
    }
}

TEST_CASE("region extraction produces matched interface patches") {
    auto m = build_rectangle_mesh(8, 8, 1.0, 1.0);
    label_box(m, 1, 0.5, 1.0, 0.0, 1.0); // right half solid
    const auto fluid = extract_region(m, 0, "solid");
    const auto solid = extract_region(m, 1, "fluid");
    const Patch* fi = fluid.find_patch("interface");
    const Patch* si = solid.find_patch("interface");
    REQUIRE(fi != nullptr);
    REQUIRE(si != nullptr);
    REQUIRE(fi->size() == si->size());
    CHECK(fi->size() == 8);
    for (int k = 0; k < fi->size(); ++k) {
        const Face& ff = fluid.faces[fi->faces[k]];
        const Face& sf = solid.faces[si->faces[k]];
        CHECK(ff.centre[0] == doctest::Approx(sf.centre[0]).epsilon(1e-12));
        CHECK(ff.centre[1] == doctest::Approx(sf.centre[1]).epsilon(1e-12));
        CHECK(ff.normal[0] == doctest::Approx(-sf.normal[0]));
        CHECK(ff.normal[1] == doctest::Approx(-sf.normal[1]));
    }
    CHECK(fluid.n_cells() + solid.n_cells() == m.n_cells());
    // scatter indices are preserved
    for (Index c = 0; c < fluid.n_cells(); ++c)
        CHECK(m.region_label[fluid.global_cells[c]] == 0);
}
