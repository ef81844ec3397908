#include "pnp/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "pnp/errors.hpp"
#include "pnp/expr.hpp"

namespace pnp {
namespace {

using nlohmann::json;

const std::set<std::string> side_kinds = {"wall", "inlet", "outlet",
                                          "periodic"};
const std::set<std::string> bc_kinds = {"zero_gradient", "dirichlet",
                                        "fixed_gradient", "flux", "jump"};
const std::set<std::string> patch_names = {"left", "right", "bottom", "top"};

/// Collects validation problems so a broken case reports everything at once.
struct Check {
    std::vector<std::string> errors;
    void add(const std::string& msg) { errors.push_back(msg); }
    void require(bool ok, const std::string& msg) {
        if (!ok) add(msg);
    }
};

template <class T>
T get_or(const json& j, const char* key, T fallback) {
    auto it = j.find(key);
    if (it == j.end())
        return fallback;
    return it->get<T>();
}

MeshConfig parse_mesh(const json& j, Check& ck) {
    MeshConfig m;
    m.nx = get_or(j, "nx", 1);
    m.ny = get_or(j, "ny", 1);
    m.Lx = get_or(j, "Lx", 1.0);
    m.Ly = get_or(j, "Ly", 1.0);
    ck.require(m.nx >= 1 && m.ny >= 1, "mesh: nx and ny must be >= 1");
    ck.require(m.Lx > 0.0 && m.Ly > 0.0, "mesh: Lx and Ly must be positive");
    if (j.contains("sides")) {
        const json& s = j["sides"];
        m.left = get_or<std::string>(s, "left", "wall");
        m.right = get_or<std::string>(s, "right", "wall");
        m.bottom = get_or<std::string>(s, "bottom", "wall");
        m.top = get_or<std::string>(s, "top", "wall");
    }
    for (const auto* side : {&m.left, &m.right, &m.bottom, &m.top})
        ck.require(side_kinds.count(*side) != 0,
                   "mesh: unknown side kind '" + *side + "'");
    ck.require((m.left == "periodic") == (m.right == "periodic"),
               "mesh: left/right must both be periodic or neither");
    ck.require((m.bottom == "periodic") == (m.top == "periodic"),
               "mesh: bottom/top must both be periodic or neither");
    if (j.contains("porous")) {
        const json& p = j["porous"];
        m.porous = true;
        m.seed = get_or<std::uint64_t>(p, "seed", 0);
        m.correlation_length = get_or(p, "correlation_length", 0.0);
        m.solid_fraction = get_or(p, "solid_fraction", 0.0);
        ck.require(m.correlation_length > 0.0,
                   "mesh.porous: correlation_length must be positive");
        ck.require(m.solid_fraction > 0.0 && m.solid_fraction < 1.0,
                   "mesh.porous: solid_fraction must lie in (0, 1)");
    }
    for (const json& b : get_or(j, "boxes", json::array())) {
        MeshConfig::Box box;
        box.label = get_or(b, "label", 0);
        box.xmin = get_or(b, "xmin", 0.0);
        box.xmax = get_or(b, "xmax", 0.0);
        box.ymin = get_or(b, "ymin", 0.0);
        box.ymax = get_or(b, "ymax", 0.0);
        ck.require(box.xmax > box.xmin && box.ymax > box.ymin,
                   "mesh.boxes: box extents must be positive");
        m.boxes.push_back(box);
    }
    return m;
}

CaseConfig parse_checked(const json& root, Check& ck) {
    CaseConfig cfg;
    cfg.mesh = parse_mesh(get_or(root, "mesh", json::object()), ck);

    std::set<std::string> region_names;
    std::set<int> region_labels;
    for (const json& r : get_or(root, "regions", json::array())) {
        RegionConfig rc;
        rc.name = get_or<std::string>(r, "name", "");
        rc.label = get_or(r, "label", 0);
        rc.kind = get_or<std::string>(r, "kind", "fluid");
        rc.mu = get_or(r, "mu", 0.0);
        rc.eps = get_or(r, "eps", 0.0);
        ck.require(!rc.name.empty(), "regions: every region needs a name");
        ck.require(region_names.insert(rc.name).second,
                   "regions: duplicate region name '" + rc.name + "'");
        ck.require(region_labels.insert(rc.label).second,
                   "regions: duplicate region label " +
                       std::to_string(rc.label));
        ck.require(rc.kind == "fluid" || rc.kind == "solid",
                   "regions: kind of '" + rc.name +
                       "' must be fluid or solid");
        ck.require(rc.mu >= 0.0 && rc.eps >= 0.0,
                   "regions: mu and eps of '" + rc.name +
                       "' must be non-negative");
        cfg.regions.push_back(rc);
    }
    ck.require(!cfg.regions.empty(), "regions: at least one region required");

    std::set<std::string> species_names;
    std::map<std::string, double> molar_mass;
    std::map<std::string, std::set<std::string>> species_regions;
    for (const json& s : get_or(root, "species", json::array())) {
        SpeciesConfig sc;
        sc.name = get_or<std::string>(s, "name", "");
        sc.z = get_or(s, "z", 0);
        sc.molar_mass = get_or(s, "molar_mass", 0.0);
        ck.require(!sc.name.empty(), "species: every species needs a name");
        ck.require(species_names.insert(sc.name).second,
                   "species: duplicate species name '" + sc.name + "'");
        ck.require(sc.molar_mass >= 0.0, "species: molar_mass of '" + sc.name +
                                             "' must be non-negative");
        molar_mass[sc.name] = sc.molar_mass;
        if (s.contains("per_region")) {
            for (const auto& [rname, rj] : s["per_region"].items()) {
                SpeciesRegionConfig src;
                src.D = get_or(rj, "D", 0.0);
                src.initial = get_or<std::string>(rj, "initial", "");
                ck.require(region_names.count(rname) != 0,
                           "species '" + sc.name + "': unknown region '" +
                               rname + "'");
                ck.require(src.D >= 0.0, "species '" + sc.name +
                                             "': D must be non-negative");
                if (!src.initial.empty()) {
                    try {
                        Expression::parse(src.initial);
                    } catch (const ConfigError& e) {
                        ck.add("species '" + sc.name + "': " + e.what());
                    }
                }
                sc.per_region[rname] = src;
                species_regions[sc.name].insert(rname);
            }
        }
        ck.require(!sc.per_region.empty(),
                   "species '" + sc.name + "': lives in no region");
        cfg.species.push_back(sc);
    }

    for (const json& b : get_or(root, "boundary", json::array())) {
        BCEntry e;
        e.region = get_or<std::string>(b, "region", "");
        e.field = get_or<std::string>(b, "field", "");
        e.patch = get_or<std::string>(b, "patch", "");
        e.kind = get_or<std::string>(b, "kind", "");
        e.value = get_or(b, "value", 0.0);
        std::string where = "boundary (" + e.region + ", " + e.field + ", " +
                            e.patch + "): ";
        ck.require(region_names.count(e.region) != 0,
                   where + "unknown region");
        ck.require(patch_names.count(e.patch) != 0, where + "unknown patch");
        ck.require(bc_kinds.count(e.kind) != 0,
                   where + "unknown kind '" + e.kind + "'");
        bool is_species = species_names.count(e.field) != 0;
        bool is_field = e.field == "u_x" || e.field == "u_y" ||
                        e.field == "p" || e.field == "phi";
        ck.require(is_species || is_field, where + "unknown field");
        if (is_species && species_regions.count(e.field))
            ck.require(species_regions[e.field].count(e.region) != 0,
                       where + "species not present in this region");
        if (e.kind == "flux")
            ck.require(is_species, where + "flux applies to species only");
        if (e.kind == "jump") {
            ck.require(e.field == "phi", where + "jump applies to phi only");
            bool periodic =
                (e.patch == "left" && cfg.mesh.left == "periodic") ||
                (e.patch == "right" && cfg.mesh.right == "periodic") ||
                (e.patch == "bottom" && cfg.mesh.bottom == "periodic") ||
                (e.patch == "top" && cfg.mesh.top == "periodic");
            ck.require(periodic, where + "jump needs a periodic patch");
        }
        cfg.boundary.push_back(e);
    }

    for (const json& i : get_or(root, "interfaces", json::array())) {
        InterfaceConfig ic;
        ic.region_a = get_or<std::string>(i, "region_a", "");
        ic.region_b = get_or<std::string>(i, "region_b", "");
        ic.conductive = get_or(i, "conductive", false);
        std::string where =
            "interface (" + ic.region_a + ", " + ic.region_b + "): ";
        ck.require(region_names.count(ic.region_a) != 0 &&
                       region_names.count(ic.region_b) != 0,
                   where + "unknown region");
        ck.require(ic.region_a != ic.region_b,
                   where + "regions must differ");
        for (const json& sl : get_or(i, "species", json::array())) {
            InterfaceSpeciesConfig l;
            l.a = get_or<std::string>(sl, "a", "");
            l.b = get_or<std::string>(sl, "b", "");
            l.k_f = get_or(sl, "k_f", 0.0);
            l.k_r = get_or(sl, "k_r", 0.0);
            l.restricted = get_or(sl, "restricted", true);
            ck.require(species_names.count(l.a) != 0 &&
                           species_names.count(l.b) != 0,
                       where + "unknown species in link");
            if (species_regions.count(l.a))
                ck.require(species_regions[l.a].count(ic.region_a) != 0,
                           where + "species '" + l.a +
                               "' not present on the a side");
            if (species_regions.count(l.b))
                ck.require(species_regions[l.b].count(ic.region_b) != 0,
                           where + "species '" + l.b +
                               "' not present on the b side");
            // a <-> b converts one mole of a into one mole of b, so equal
            // molar masses are what conserves mass across the interface
            if (molar_mass.count(l.a) && molar_mass.count(l.b))
                ck.require(molar_mass[l.a] == molar_mass[l.b],
                           where + "link " + l.a + " <-> " + l.b +
                               " does not conserve mass (molar masses differ)");
            ck.require(l.k_f >= 0.0 && l.k_r >= 0.0,
                       where + "rate constants must be non-negative");
            ic.species.push_back(l);
        }
        cfg.interfaces.push_back(ic);
    }

    if (root.contains("time")) {
        const json& t = root["time"];
        cfg.time.dt = get_or(t, "dt", 0.0);
        cfg.time.end_time = get_or(t, "end_time", 0.0);
        cfg.time.write_interval = get_or(t, "write_interval", 0.0);
        cfg.time.scheme = get_or<std::string>(t, "scheme", "euler");
        cfg.time.steady = get_or(t, "steady", false);
    }
    ck.require(cfg.time.scheme == "euler" || cfg.time.scheme == "backward2",
               "time: scheme must be euler or backward2");
    if (!cfg.time.steady) {
        ck.require(cfg.time.dt > 0.0, "time: dt must be positive");
        ck.require(cfg.time.end_time >= cfg.time.dt,
                   "time: end_time must cover at least one step");
    }

    if (root.contains("solver")) {
        const json& s = root["solver"];
        cfg.solver.rel_tol = get_or(s, "rel_tol", 1e-9);
        cfg.solver.abs_tol = get_or(s, "abs_tol", 0.0);
        cfg.solver.max_iters = get_or(s, "max_iters", 2000);
        cfg.solver.max_outer = get_or(s, "max_outer", 50);
        cfg.solver.outer_tol = get_or(s, "outer_tol", 1e-7);
        cfg.solver.max_sweeps = get_or(s, "max_sweeps", 30);
        cfg.solver.sweep_tol = get_or(s, "sweep_tol", 1e-8);
        cfg.solver.convection = get_or<std::string>(s, "convection", "upwind");
    }
    ck.require(cfg.solver.convection == "upwind" ||
                   cfg.solver.convection == "linear",
               "solver: convection must be upwind or linear");
    ck.require(cfg.solver.rel_tol > 0.0 && cfg.solver.max_iters > 0 &&
                   cfg.solver.max_outer > 0 && cfg.solver.outer_tol > 0.0,
               "solver: tolerances and iteration caps must be positive");

    if (root.contains("flow")) {
        const json& f = root["flow"];
        cfg.flow.frozen = get_or(f, "frozen", false);
        auto vel = get_or(f, "velocity", json::array({0.0, 0.0}));
        auto force = get_or(f, "body_force", json::array({0.0, 0.0}));
        if (vel.size() == 2) {
            cfg.flow.velocity = {vel[0].get<double>(), vel[1].get<double>()};
        } else {
            ck.add("flow: velocity must have two components");
        }
        if (force.size() == 2) {
            cfg.flow.body_force = {force[0].get<double>(),
                                   force[1].get<double>()};
        } else {
            ck.add("flow: body_force must have two components");
        }
    }

    cfg.electroneutral = get_or(root, "electroneutral", false);
    cfg.temperature = get_or(root, "temperature", 300.0);
    ck.require(cfg.temperature > 0.0, "temperature must be positive");
    if (cfg.electroneutral) {
        ck.require(cfg.species.size() >= 2,
                   "electroneutral: needs at least two species");
        if (!cfg.species.empty())
            ck.require(cfg.species.back().z != 0,
                       "electroneutral: last species must be charged (it "
                       "carries the closure)");
    }
    return cfg;
}

json emit_json(const CaseConfig& cfg) {
    json root;
    json& m = root["mesh"];
    m["nx"] = cfg.mesh.nx;
    m["ny"] = cfg.mesh.ny;
    m["Lx"] = cfg.mesh.Lx;
    m["Ly"] = cfg.mesh.Ly;
    m["sides"] = {{"left", cfg.mesh.left},
                  {"right", cfg.mesh.right},
                  {"bottom", cfg.mesh.bottom},
                  {"top", cfg.mesh.top}};
    if (cfg.mesh.porous)
        m["porous"] = {{"seed", cfg.mesh.seed},
                       {"correlation_length", cfg.mesh.correlation_length},
                       {"solid_fraction", cfg.mesh.solid_fraction}};
    if (!cfg.mesh.boxes.empty()) {
        json boxes = json::array();
        for (const auto& b : cfg.mesh.boxes)
            boxes.push_back({{"label", b.label},
                             {"xmin", b.xmin},
                             {"xmax", b.xmax},
                             {"ymin", b.ymin},
                             {"ymax", b.ymax}});
        m["boxes"] = boxes;
    }

    root["regions"] = json::array();
    for (const auto& r : cfg.regions)
        root["regions"].push_back({{"name", r.name},
                                   {"label", r.label},
                                   {"kind", r.kind},
                                   {"mu", r.mu},
                                   {"eps", r.eps}});

    root["species"] = json::array();
    for (const auto& s : cfg.species) {
        json js = {{"name", s.name},
                   {"z", s.z},
                   {"molar_mass", s.molar_mass}};
        json per = json::object();
        for (const auto& [rname, rc] : s.per_region)
            per[rname] = {{"D", rc.D}, {"initial", rc.initial}};
        js["per_region"] = per;
        root["species"].push_back(js);
    }

    root["boundary"] = json::array();
    for (const auto& b : cfg.boundary)
        root["boundary"].push_back({{"region", b.region},
                                    {"field", b.field},
                                    {"patch", b.patch},
                                    {"kind", b.kind},
                                    {"value", b.value}});

    if (!cfg.interfaces.empty()) {
        root["interfaces"] = json::array();
        for (const auto& i : cfg.interfaces) {
            json ji = {{"region_a", i.region_a},
                       {"region_b", i.region_b},
                       {"conductive", i.conductive}};
            json links = json::array();
            for (const auto& l : i.species)
                links.push_back({{"a", l.a},
                                 {"b", l.b},
                                 {"k_f", l.k_f},
                                 {"k_r", l.k_r},
                                 {"restricted", l.restricted}});
            ji["species"] = links;
            root["interfaces"].push_back(ji);
        }
    }

    root["time"] = {{"dt", cfg.time.dt},
                    {"end_time", cfg.time.end_time},
                    {"write_interval", cfg.time.write_interval},
                    {"scheme", cfg.time.scheme},
                    {"steady", cfg.time.steady}};
    root["solver"] = {{"rel_tol", cfg.solver.rel_tol},
                      {"abs_tol", cfg.solver.abs_tol},
                      {"max_iters", cfg.solver.max_iters},
                      {"max_outer", cfg.solver.max_outer},
                      {"outer_tol", cfg.solver.outer_tol},
                      {"max_sweeps", cfg.solver.max_sweeps},
                      {"sweep_tol", cfg.solver.sweep_tol},
                      {"convection", cfg.solver.convection}};
    root["flow"] = {{"frozen", cfg.flow.frozen},
                    {"velocity", cfg.flow.velocity},
                    {"body_force", cfg.flow.body_force}};
    root["electroneutral"] = cfg.electroneutral;
    root["temperature"] = cfg.temperature;
    return root;
}

} // namespace

CaseConfig parse_case(const std::string& json_text, const std::string& origin) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(origin + ": " + e.what());
    }
    Check ck;
    CaseConfig cfg = parse_checked(root, ck);
    if (!ck.errors.empty()) {
        std::ostringstream os;
        os << origin << ": " << ck.errors.size() << " problem(s):";
        for (const auto& e : ck.errors)
            os << "\n  - " << e;
        throw ConfigError(os.str());
    }
    return cfg;
}

CaseConfig load_case(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open case file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_case(buf.str(), path);
}

std::string emit_case(const CaseConfig& cfg) {
    return emit_json(cfg).dump(2) + "\n";
}

void save_case(const CaseConfig& cfg, const std::string& path) {
    std::ofstream out(path);
    if (!out)
        throw ConfigError("cannot write case file '" + path + "'");
    out << emit_case(cfg);
}

} // namespace pnp
