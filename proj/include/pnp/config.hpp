#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace pnp {

/// Declarative case description loaded from a single JSON file. Loading
/// validates everything it can and reports all problems at once; a loaded
/// configuration is already normalised, so emit(load(f)) is canonical and
/// load(emit(load(f))) == load(f).

struct MeshConfig {
    int nx = 1, ny = 1;
    double Lx = 1.0, Ly = 1.0;
    std::string left = "wall", right = "wall", bottom = "wall", top = "wall";

    // optional random porous labelling (solid = label 1)
    bool porous = false;
    std::uint64_t seed = 0;
    double correlation_length = 0.0;
    double solid_fraction = 0.0;

    struct Box {
        int label = 0;
        double xmin = 0.0, xmax = 0.0, ymin = 0.0, ymax = 0.0;
    };
    std::vector<Box> boxes; ///< applied in order after any porous labelling
};

struct RegionConfig {
    std::string name;
    int label = 0;
    std::string kind = "fluid"; ///< "fluid" or "solid"
    double mu = 0.0;
    double eps = 0.0;
};

struct SpeciesRegionConfig {
    double D = 0.0;
    std::string initial; ///< expression in x, y; empty means 0
};

struct SpeciesConfig {
    std::string name;
    int z = 0;
    double molar_mass = 0.0;
    std::map<std::string, SpeciesRegionConfig> per_region; ///< region name key
};

/// One row of the boundary-condition table. `kind` is one of zero_gradient,
/// dirichlet, fixed_gradient, flux (species only) or jump (quasi-periodic
/// potential offset on a periodic patch).
struct BCEntry {
    std::string region, field, patch, kind;
    double value = 0.0;
};

struct InterfaceSpeciesConfig {
    std::string a, b; ///< species names on the region_a / region_b side
    double k_f = 0.0, k_r = 0.0;
    bool restricted = true;
};

struct InterfaceConfig {
    std::string region_a, region_b;
    bool conductive = false;
    std::vector<InterfaceSpeciesConfig> species;
};

struct TimeConfig {
    double dt = 0.0;
    double end_time = 0.0;
    double write_interval = 0.0; ///< 0 means final state only
    std::string scheme = "euler"; ///< euler or backward2
    bool steady = false;
};

struct SolverConfig {
    double rel_tol = 1e-9;
    double abs_tol = 0.0;
    int max_iters = 2000;
    int max_outer = 50;
    double outer_tol = 1e-7;
    int max_sweeps = 30;
    double sweep_tol = 1e-8;
    std::string convection = "upwind"; ///< upwind or linear
};

struct FlowConfig {
    bool frozen = false;
    std::array<double, 2> velocity{0.0, 0.0}; ///< used when frozen
    std::array<double, 2> body_force{0.0, 0.0};
};

struct CaseConfig {
    MeshConfig mesh;
    std::vector<RegionConfig> regions;
    std::vector<SpeciesConfig> species;
    std::vector<BCEntry> boundary;
    std::vector<InterfaceConfig> interfaces;
    TimeConfig time;
    SolverConfig solver;
    FlowConfig flow;
    bool electroneutral = false;
    double temperature = 300.0;
};

/// Parses and validates a case file. Every detected problem is listed in the
/// ConfigError message, one per line, so a broken case is fixed in one pass.
CaseConfig load_case(const std::string& path);

/// Parses a case from JSON text (same validation as load_case).
CaseConfig parse_case(const std::string& json_text,
                      const std::string& origin = "<string>");

/// Canonical JSON text for a configuration.
std::string emit_case(const CaseConfig& cfg);

void save_case(const CaseConfig& cfg, const std::string& path);

} // namespace pnp
