#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "pnp/config.hpp"
#include "pnp/errors.hpp"
#include "pnp/expr.hpp"
#include "pnp/io.hpp"
#include "pnp/mesh.hpp"

using namespace pnp;

TEST_CASE("expressions evaluate with the usual precedence") {
    CHECK(Expression::parse("2+3*4").eval(0, 0) == doctest::Approx(14.0));
    CHECK(Expression::parse("2^3^2").eval(0, 0) == doctest::Approx(512.0));
    CHECK(Expression::parse("-x^2").eval(3, 0) == doctest::Approx(-9.0));
    CHECK(Expression::parse("(2+3)*4").eval(0, 0) == doctest::Approx(20.0));
    CHECK(Expression::parse("1e-3").eval(0, 0) == doctest::Approx(1e-3));
    CHECK(Expression::parse("x*y").eval(2.0, 3.5) == doctest::Approx(7.0));
    CHECK(Expression::parse("sqrt(abs(-16))").eval(0, 0) ==
          doctest::Approx(4.0));

    // the initial profiles used by the transient cases
    const double L = 1e-6;
    auto phi0 = Expression::parse("0.05*(1-cos(pi*x/1e-6))");
    CHECK(phi0.eval(0.0, 0.0) == doctest::Approx(0.0));
    CHECK(phi0.eval(L, 0.0) == doctest::Approx(0.1));
    CHECK(phi0.eval(0.5 * L, 0.0) == doctest::Approx(0.05));
    auto gauss = Expression::parse("exp(-200*(x-0.5)^2)");
    CHECK(gauss.eval(0.5, 0.0) == doctest::Approx(1.0));
    CHECK(gauss.eval(0.6, 0.0) == doctest::Approx(std::exp(-2.0)));

    CHECK(Expression().eval(1.0, 2.0) == 0.0); // default is constant zero
}

TEST_CASE("expression parse failures name the offending spot") {
    CHECK_THROWS_AS(Expression::parse("2+"), ConfigError);
    CHECK_THROWS_AS(Expression::parse("bogus(3)"), ConfigError);
    CHECK_THROWS_AS(Expression::parse("cos 3"), ConfigError);
    CHECK_THROWS_AS(Expression::parse("(1+2"), ConfigError);
    CHECK_THROWS_AS(Expression::parse("1 2"), ConfigError);
    try {
        Expression::parse("1+&2");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("position") != std::string::npos);
    }
}

namespace {

const char* minimal_case = R"json({
  "mesh": {"nx": 16, "ny": 1, "Lx": 1.0, "Ly": 1.0},
  "regions": [{"name": "cell", "kind": "fluid", "label": 0}],
  "species": [
    {"name": "c", "z": 0, "molar_mass": 0.01,
     "per_region": {"cell": {"D": 1.0, "initial": "1"}}}
  ],
  "time": {"dt": 0.01, "end_time": 0.05},
  "flow": {"frozen": true}
})json";

} // namespace

TEST_CASE("a loaded case emits canonically and round-trips") {
    CaseConfig cfg = parse_case(minimal_case);
    CHECK(cfg.mesh.nx == 16);
    CHECK(cfg.regions.size() == 1);
    CHECK(cfg.species[0].per_region.at("cell").D == doctest::Approx(1.0));
    CHECK(cfg.flow.frozen);

    const std::string once = emit_case(cfg);
    CaseConfig again = parse_case(once);
    const std::string twice = emit_case(again);
    CHECK(once == twice); // normal form is a fixed point

    // defaults are materialised in the normal form
    CHECK(once.find("\"solver\"") != std::string::npos);
    CHECK(once.find("\"convection\"") != std::string::npos);
}

TEST_CASE("validation reports every problem at once") {
    const char* broken = R"json({
      "mesh": {"nx": 0, "Lx": -1.0,
               "sides": {"left": "periodic", "right": "wall"}},
      "regions": [{"name": "a", "kind": "liquid", "label": 0},
                  {"name": "a", "kind": "fluid", "label": 0}],
      "species": [{"name": "c", "per_region": {"nowhere": {"D": -1,
                   "initial": "2+"}}}],
      "boundary": [{"region": "ghost", "field": "zeta", "patch": "lid",
                    "kind": "pinned"}],
      "time": {"dt": -1, "scheme": "leapfrog"}
    })json";
    try {
        parse_case(broken);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        const std::string msg = e.what();
        // one line per problem; all of them in a single throw
        CHECK(msg.find("nx and ny") != std::string::npos);
        CHECK(msg.find("Lx and Ly") != std::string::npos);
        CHECK(msg.find("periodic") != std::string::npos);
        CHECK(msg.find("duplicate region name") != std::string::npos);
        CHECK(msg.find("duplicate region label") != std::string::npos);
        CHECK(msg.find("fluid or solid") != std::string::npos);
        CHECK(msg.find("unknown region") != std::string::npos);
        CHECK(msg.find("unknown patch") != std::string::npos);
        CHECK(msg.find("unknown field") != std::string::npos);
        CHECK(msg.find("unknown kind") != std::string::npos);
        CHECK(msg.find("dt must be positive") != std::string::npos);
        CHECK(msg.find("scheme") != std::string::npos);
    }
}

TEST_CASE("interface links must conserve mass") {
    const char* unbalanced = R"json({
      "mesh": {"nx": 8, "ny": 1, "boxes": [
        {"label": 1, "xmin": 0.5, "xmax": 1.0, "ymin": 0.0, "ymax": 1.0}]},
      "regions": [{"name": "f", "kind": "fluid", "label": 0},
                  {"name": "s", "kind": "solid", "label": 1}],
      "species": [
        {"name": "a", "molar_mass": 0.010, "per_region": {"f": {"D": 1}}},
        {"name": "b", "molar_mass": 0.018, "per_region": {"s": {"D": 1}}}
      ],
      "interfaces": [{"region_a": "f", "region_b": "s",
        "species": [{"a": "a", "b": "b", "k_f": 1, "k_r": 2}]}],
      "time": {"dt": 0.1, "end_time": 0.1}
    })json";
    try {
        parse_case(unbalanced);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("conserve mass") !=
              std::string::npos);
    }
}

TEST_CASE("potential jumps need a periodic patch") {
    std::string text = minimal_case;
    const std::string bc = R"json("boundary": [{"region": "cell", "field": "phi",
        "patch": "left", "kind": "jump", "value": 0.01}],)json";
    text.insert(text.find("\"regions\""), bc);
    CHECK_THROWS_AS(parse_case(text), ConfigError);

    // with the side made periodic the same entry is accepted
    std::string ok = text;
    const std::string sides =
        R"json(, "sides": {"left": "periodic", "right": "periodic"})json";
    ok.insert(ok.find("\"Ly\": 1.0}") + 9, sides);
    CaseConfig cfg = parse_case(ok);
    CHECK(cfg.boundary[0].kind == "jump");
}

TEST_CASE("electroneutral closure needs a charged last species") {
    std::string text = minimal_case;
    text.insert(text.find("\"mesh\""), "\"electroneutral\": true,\n");
    CHECK_THROWS_AS(parse_case(text), ConfigError);
}

TEST_CASE("missing case files are reported by path") {
    try {
        load_case("/no/such/dir/case.json");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("/no/such/dir/case.json") !=
              std::string::npos);
    }
}

TEST_CASE("line samples walk cell centres and reject outside positions") {
    auto mesh = build_rectangle_mesh(8, 4, 2.0, 1.0);
    std::vector<double> f(32);
    for (int j = 0; j < 4; ++j)
        for (int i = 0; i < 8; ++i)
            f[j * 8 + i] = 10.0 * j + i;

    LineSample row = sample_line(mesh, {{"f", f}}, 'x', 0.6); // j = 2
    REQUIRE(row.rows.size() == 8);
    CHECK(row.header[0] == "x");
    CHECK(row.rows[0][0] == doctest::Approx(0.125));
    CHECK(row.rows[3][1] == doctest::Approx(23.0));

    LineSample col = sample_line(mesh, {{"f", f}}, 'y', 1.95); // i = 7
    REQUIRE(col.rows.size() == 4);
    CHECK(col.rows[2][1] == doctest::Approx(27.0));

    CHECK_THROWS_AS(sample_line(mesh, {{"f", f}}, 'x', 1.5), ConfigError);
    CHECK_THROWS_AS(sample_line(mesh, {{"f", f}}, 'y', -0.1), ConfigError);
    CHECK_THROWS_AS(sample_line(mesh, {{"f", f}}, 'z', 0.5), ConfigError);
}

TEST_CASE("vtk and csv writers produce well-formed files") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "pnp_io_test";
    fs::create_directories(dir);

    auto mesh = build_rectangle_mesh(3, 2, 3.0, 2.0);
    std::vector<double> f{1, 2, 3, 4, 5, 6};
    const std::string vtk = (dir / "t.vtk").string();
    write_vtk(vtk, mesh, {{"f", f}});
    std::ifstream in(vtk);
    std::string text((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
    CHECK(text.find("DATASET STRUCTURED_POINTS") != std::string::npos);
    CHECK(text.find("DIMENSIONS 4 3 1") != std::string::npos);
    CHECK(text.find("CELL_DATA 6") != std::string::npos);
    CHECK(text.find("SCALARS f double 1") != std::string::npos);

    const std::string csv = (dir / "t.csv").string();
    write_csv(csv, {"a", "b"}, {{1.5, 2.5}, {3.0, 4.0}});
    std::ifstream cin_(csv);
    std::string line;
    std::getline(cin_, line);
    CHECK(line == "a,b");
    std::getline(cin_, line);
    CHECK(line == "1.5,2.5");

    CHECK_THROWS_AS(write_csv(csv, {"a"}, {{1.0, 2.0}}), ConfigError);
    std::vector<double> wrong(5, 0.0);
    CHECK_THROWS_AS(write_vtk(vtk, mesh, {{"f", wrong}}), ConfigError);
    fs::remove_all(dir);
}
