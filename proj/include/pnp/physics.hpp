#pragma once

#include <array>
#include <memory>
#include <string>
#include <vector>

#include "pnp/boundary.hpp"
#include "pnp/constants.hpp"
#include "pnp/discretization.hpp"
#include "pnp/field.hpp"
#include "pnp/linsolve.hpp"
#include "pnp/mesh.hpp"

namespace pnp {

/// Region-level solution algorithms: segregated Stokes with pressure
/// correction, Poisson / electroneutral potential, species transport, the
/// outer iteration tying them together, and the multi-region sweep with
/// reactive interface coupling.

enum class RegionKind { fluid, solid };

struct SpeciesDef {
    std::string name;
    double D = 0.0;          ///< diffusivity in this region [m²/s]
    int z = 0;
    double molar_mass = 0.0; ///< [kg/mol], for mass-weighted balances
};

enum class BCKind { zero_gradient, dirichlet, fixed_gradient, flux };

/// Per-patch condition descriptor. `value` is the fixed value, the fixed
/// gradient, or the prescribed total normal flux j0 depending on the kind.
/// Species `flux` conditions fold the advective and migration parts using
/// the current face flux and potential gradient, so they are recompiled on
/// every solve.
struct PatchBC {
    BCKind kind = BCKind::zero_gradient;
    double value = 0.0;
};

struct StokesCache;

struct RegionState {
    const StructuredMesh* mesh = nullptr;
    RegionKind kind = RegionKind::fluid;
    std::string name;
    double mu = 0.0;  ///< viscosity [Pa s] (fluid only)
    double eps = 0.0; ///< permittivity [F/m]
    PhysicalConstants pc;
    std::vector<SpeciesDef> species;

    VectorField u; ///< unused for solid regions
    Field p, phi;
    std::vector<Field> c;
    FaceScalar face_flux; ///< volumetric face flux u_f·S_f [m³/s]

    // per-patch descriptors; interface patches are overridden in place by
    // the multi-region coupler and preserved by the compile step
    std::vector<PatchBC> ux_bc, uy_bc, p_bc, phi_bc;
    std::vector<std::vector<PatchBC>> c_bc; ///< [species][patch]
    std::vector<double> phi_link_jump;      ///< quasi-periodic offsets

    // compiled boundary data consumed by assembly
    FieldBCs ux_bcs, uy_bcs, p_bcs, phi_bcs;
    std::vector<FieldBCs> c_bcs;

    // patches whose compiled coefficients are owned by the multi-region
    // coupler; the compile step leaves them alone
    std::vector<char> phi_coupled;            ///< per patch
    std::vector<std::vector<char>> c_coupled; ///< [species][patch]

    // time history (per species cell values)
    std::vector<std::vector<double>> c_old, c_older;
    bool have_older = false;

    /// cached coupled-Stokes factorisation; reset when the static boundary
    /// conditions are recompiled
    std::shared_ptr<StokesCache> stokes_cache;
};

RegionState make_region(const StructuredMesh& mesh, RegionKind kind,
                        std::string name);

/// Adds a species initialised to c0; returns its index. Default boundary
/// conditions: zero total flux on walls and interfaces, zero gradient on
/// inlets/outlets.
int add_species(RegionState& st, const SpeciesDef& def, double c0);

/// Compiles u, p and phi boundary data from the descriptors. Call after
/// changing any static descriptor; species conditions are compiled inside
/// solve_species because they depend on the evolving flux and potential.
void compile_static_bcs(RegionState& st);

/// Recompiles species i's boundary data from the current face flux and
/// potential gradient. Interface-patch entries installed by the coupler are
/// left untouched.
void compile_species_bcs(RegionState& st, int i);

/// F Σ z_i c_i per cell [C/m³].
std::vector<double> charge_density(const RegionState& st);

double total_moles(const RegionState& st, int i);

/// Prescribes a uniform frozen velocity: fills cell values, boundary values
/// and the volumetric face flux (walls included, so zero-total-flux species
/// conditions see the advective part they must cancel).
void set_uniform_flow(RegionState& st, double ux, double uy);

/// Pushes c into the history (old -> older, current -> old).
void advance_history(RegionState& st);

/// Krylov solve that detects a floating gauge (every row sum vanishing, the
/// signature of an all-Neumann/periodic operator). If `allow_gauge`, cell 0
/// is pinned to zero; otherwise a ConfigError names the field.
SolveReport gauge_aware_solve(LinearSystem& sys, std::vector<double>& x,
                              SolveControls controls, bool allow_gauge,
                              const std::string& context);

// -- flow -------------------------------------------------------------------

/// Momentum diagonal and the pressure-free pseudo-velocity (H + body
/// forces)/A produced by the predictor.
struct MomentumSplit {
    std::vector<double> Ax, Ay;
    std::vector<double> wx, wy;
};

/// Solves the Stokes momentum balance μ∇²u = ∇p + ρ_el∇φ + J with the
/// current pressure and freshest charge density, then returns the A/H split
/// for the pressure correction.
MomentumSplit momentum_predict(RegionState& st, const std::array<double, 2>& J,
                               const SolveControls& controls,
                               std::vector<SolveReport>* reports = nullptr);

/// Pressure correction: solves ∇·((1/A)_f ∇p) = ∇·(((H + V f)/A)_f) and
/// updates cell velocities, boundary values and the conservative face flux.
/// All-Neumann pressure is gauged by pinning the reference cell to zero.
/// `max_div` receives max_c|∇·U| / max_f|U_f| after correction.
SolveReport pressure_correct(RegionState& st, const MomentumSplit& split,
                             const SolveControls& controls,
                             double* max_div = nullptr);

/// Monolithic Stokes solve: both momentum components and the stabilised
/// continuity equation assembled into one sparse system and factorised
/// directly. The discrete solution is exactly the fixed point of the
/// segregated predictor/corrector pair, so the corrected face flux stays
/// conservative to factorisation accuracy. The segregated pair is not used
/// inside the outer loop because quasi-static momentum has no inertial
/// diagonal: its velocity/pressure exchange amplifies smooth pressure modes
/// without bound once the inner solves are tight. The factorisation is
/// cached on the region and invalidated by compile_static_bcs; only the
/// right-hand side (charge force) is rebuilt per call. Reports are for
/// u_x, u_y and p in that order.
std::array<SolveReport, 3> stokes_solve_coupled(RegionState& st,
                                                const std::array<double, 2>& J,
                                                double* max_div = nullptr);

// -- potential and species --------------------------------------------------

/// ε∇²φ = −F Σ z_i c_i with the freshest concentrations. All-Neumann
/// conditions raise ConfigError: the gauge must come from the case setup.
/// `charge_response` > 0 adds the implicit charge-response stabilisation
/// (F²/RT) Σ z_i² c_i (φ − φ*) to the source, which vanishes at the
/// converged outer fixed point but lets the outer iteration step far beyond
/// the double-layer charging time.
SolveReport solve_potential(RegionState& st, const SolveControls& controls,
                            double charge_response = 0.0);

/// One implicit transport solve for species i. Fluid: time derivative,
/// advection by the conservative face flux, migration drift flux and
/// diffusion; solid: time derivative and diffusion. Undershoot beyond
/// −1e-12·max(c) aborts: clipping is never applied.
SolveReport solve_species(RegionState& st, int i, TimeScheme scheme, double dt,
                          ConvectionScheme convection,
                          const SolveControls& controls);

/// Replaces the last species by the electroneutrality closure
/// c_N = −(1/z_N) Σ_{i<N} z_i c_i. z_N = 0 is a ConfigError.
void electroneutral_closure(RegionState& st);

/// Zero-current potential: ∇·(κ∇φ) = −∇·(F Σ z_i D_i ∇c_i) with the
/// conductivity κ = (F²/RT) Σ z_i² D_i c_i. All-Neumann conditions are
/// gauged by pinning the reference cell.
SolveReport solve_electroneutral_potential(RegionState& st,
                                           const SolveControls& controls);

/// v_i = u − (D_i z_i F / RT) ∇φ.
VectorField migration_velocity(const RegionState& st, int i);

/// Outward total species flux through each face of a patch [mol/s]:
/// (−D ∇_n c + (u·n + v_drift) c) A from the compiled conditions.
std::vector<double> patch_species_flux(const RegionState& st, int patch,
                                       int i);

// -- outer iteration --------------------------------------------------------

struct StepControls {
    TimeScheme time_scheme = TimeScheme::euler;
    double dt = 0.0;
    ConvectionScheme convection = ConvectionScheme::upwind;
    std::array<double, 2> J{0.0, 0.0}; ///< constant body-force density
    bool frozen_flow = false;          ///< skip momentum and pressure
    bool electroneutral = false;       ///< closure + zero-current potential
    int max_outer = 50;
    double outer_tol = 1e-7;           ///< max relative field change
    SolveControls linear;
};

struct OuterReport {
    int outers = 0;
    bool converged = false;
    double final_change = 0.0;
    double max_divergence = 0.0; ///< relative |∇·U| after last correction
    std::vector<std::string> log; ///< one line per linear solve
};

/// One converged time step (or steady solve) of a single region: repeats
/// momentum/pressure (fluid, unless frozen), potential and species solves
/// until the largest relative field change falls below outer_tol. Five
/// consecutive growing outer changes abort with a SolverError. The time
/// history is NOT advanced; call advance_history once the step (and any
/// multi-region sweeps around it) is accepted.
OuterReport pimple_outer_loop(RegionState& st, const StepControls& controls);

// -- multi-region coupling --------------------------------------------------

/// One species pair exchanged through an interface. Restricted: sp_a lives
/// only in region a (fluid side), sp_b only in region b, coupled by the
/// linear rate r = k_f c_b − k_r c_a (outward flux of the b side).
/// Unrestricted (restricted = false): the species exists on both sides and
/// the interface enforces value and flux continuity.
struct SpeciesLink {
    int sp_a = -1, sp_b = -1;
    double k_f = 0.0, k_r = 0.0;
    bool restricted = true;
};

struct RegionInterface {
    int region_a = -1, region_b = -1; ///< indices into the regions vector
    int patch_a = -1, patch_b = -1;   ///< matched-ordering interface patches
    bool conductive = false;          ///< potential continuity across Γ
    std::vector<SpeciesLink> species;
};

struct MultiRegionReport {
    int sweeps = 0;
    bool converged = false;
    double final_change = 0.0; ///< largest interface value movement
    std::vector<OuterReport> region_reports; ///< last sweep, region order
};

/// One coupled time step: re-evaluates every interface condition from the
/// partner side, solves fluid regions then solid regions, and repeats the
/// sweep until the interface face values stagnate. Histories of all regions
/// are advanced on acceptance.
MultiRegionReport multi_region_step(std::vector<RegionState>& regions,
                                    const std::vector<RegionInterface>& links,
                                    const StepControls& controls,
                                    int max_sweeps = 30,
                                    double sweep_tol = 1e-8);

} // namespace pnp
