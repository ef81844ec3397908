#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "pnp/config.hpp"
#include "pnp/io.hpp"
#include "pnp/physics.hpp"

namespace pnp {

/// A fully constructed case: parent mesh, one mesh and state per region,
/// interface couplings and the step controls translated from the
/// configuration.
struct Simulation {
    CaseConfig cfg;
    StructuredMesh parent;
    std::vector<StructuredMesh> meshes; ///< same order as cfg.regions
    std::vector<RegionState> regions;
    std::vector<RegionInterface> links;
    StepControls step;
    int max_sweeps = 30;
    double sweep_tol = 1e-8;

    bool multi_region() const { return regions.size() > 1; }
};

/// Builds meshes, states, species, boundary conditions and couplings from a
/// validated configuration. Problems only detectable with the mesh in hand
/// (a region that never touches a referenced patch, regions that share no
/// interface) raise ConfigError.
Simulation build_simulation(const CaseConfig& cfg);

/// Every region field scattered onto the parent grid (zero outside the
/// owning region), plus the region label as "region".
std::vector<NamedCellField> snapshot_fields(const Simulation& sim);

/// Advances one time step (or performs the steady solve); returns the
/// residual log lines. SolverError propagates to the caller with the states
/// already mid-step.
std::vector<std::string> advance_step(Simulation& sim);

struct RunResult {
    bool ok = true;
    std::string error;
    int steps = 0;
    double time = 0.0;
};

/// Runs the case to its end time, writing VTK snapshots at the write
/// interval, per-species totals to samples/totals.csv and the residual log
/// to log.txt under `out_dir` ("" disables all output). A diverging step is
/// rolled back; the last good state is written and ok = false. `echo`
/// receives the log lines as they are produced (may be null).
RunResult run_case(Simulation& sim, const std::string& out_dir,
                   std::ostream* echo = nullptr);

// -- convergence studies ------------------------------------------------------

/// Reference profile for one output field along the sampled line. A null
/// `value` compares the field against itself (identical-zero error, used to
/// flag self-comparisons). `gauge_free` removes the mean from both profiles
/// before comparing (pressure). [lo, hi] restricts the compared coordinate
/// range when the reference is only defined on part of the line.
struct ProfileRef {
    std::string field;
    std::function<double(double)> value;
    bool gauge_free = false;
    double lo = -1e300, hi = 1e300;
};

struct StudyOptions {
    char refine_axis = 'y'; ///< mesh direction the resolution replaces
    char sample_axis = 'y'; ///< direction of the sampled line
    double sample_frac = 0.5; ///< cross-direction position as a fraction
    bool parallel = true;     ///< run resolutions in worker threads
};

struct ConvergenceResult {
    std::vector<int> resolutions;
    std::vector<std::string> fields;
    std::vector<std::vector<double>> errors; ///< [field][resolution], relative L²
    std::vector<double> orders;              ///< least-squares slope per field
    std::vector<bool> monotone;              ///< strictly decreasing errors
    bool order_defined = true; ///< false when the errors vanish (self-compare)
};

/// Runs the base case at each resolution and compares the sampled profiles
/// against the references: error = ‖v − ref‖₂ / ‖ref‖₂ over the cell
/// centres, order = least-squares slope of log error against log h.
/// Non-monotone error sequences are reported in `monotone` but still
/// emitted.
ConvergenceResult convergence_study(const CaseConfig& base,
                                    const std::vector<int>& resolutions,
                                    const StudyOptions& opts,
                                    const std::vector<ProfileRef>& refs);

void write_convergence_csv(const std::string& path,
                           const ConvergenceResult& r);

/// Builds reference profiles from the companion 1D solvers. `kind` is one
/// of "channel", "two_species", "reactive_interface" or "self"; the problem
/// parameters are read from the configuration.
std::vector<ProfileRef> oracle_refs(const CaseConfig& cfg,
                                    const std::string& kind);

} // namespace pnp
