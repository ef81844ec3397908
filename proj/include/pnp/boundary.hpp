#pragma once

#include <string>
#include <vector>

#include "pnp/field.hpp"
#include "pnp/mesh.hpp"

namespace pnp {

/// Effective Robin condition −D*∇_n c|Γ = −K* c|Γ − F* for the outward
/// normal n of the patch. Every concrete boundary condition is normalised
/// to this form before assembly.
struct RobinCoeffs {
    double D_star = 1.0;
    double K_star = 0.0;
    double F_star = 0.0;
};

/// Interpolation weights reconstructing face value and normal gradient from
/// the owner cell centre:  c|Γ = a1 c_c + a2,  ∇_n c|Γ = a3 c_c + a4.
struct RobinAlphas {
    double a1 = 1.0, a2 = 0.0, a3 = 0.0, a4 = 0.0;
};

/// B is the inverse cell-centre-to-face distance. Throws BoundaryError when
/// D*B − K* vanishes; `context` names the offending patch in the message.
RobinAlphas robin_alphas(const RobinCoeffs& c, double B,
                         const std::string& context = "");

// -- standard conditions ----------------------------------------------------

RobinCoeffs dirichlet_coeffs(double value);
RobinCoeffs fixed_gradient_coeffs(double gradient);
inline RobinCoeffs zero_gradient_coeffs() { return {1.0, 0.0, 0.0}; }

/// Species wall/membrane condition j·n = j0 where
/// j·n = −D ∇_n c + (u·n + v_drift)c and v_drift = −(z D F / RT) ∇_n φ.
RobinCoeffs species_flux_coeffs(double D, double u_dot_n, double v_drift,
                                double j0 = 0.0);

/// Two-sided diffusive interface (conductive potential / displacement
/// continuity): value continuity plus flux balance
/// γ_own ∇_n φ|own + γ_other ∇_n φ|other = source, with the partner side
/// approximated through its own cell value. `source` carries the current
/// jump F Σ z_i r_i for reactive conductive interfaces (0 otherwise).
RobinCoeffs two_sided_diffusive_coeffs(double gamma_own, double gamma_other,
                                       double B_other, double other_cell_value,
                                       double source = 0.0);

// -- reactive interface (Newton-iterated) -----------------------------------

/// State of one interface face as seen from one side at Newton iterate N.
/// `u_dot_nprime` and `drift` are evaluated on the fluid side with n'
/// pointing out of the fluid; drift = (z D_f F / RT) ∇_{n'} φ_f.
struct InterfaceFaceState {
    double c_own_face = 0.0;   ///< c^N on this side of Γ
    double c_other_face = 0.0; ///< c^N on the partner side of Γ
    double c_other_cell = 0.0; ///< partner-side cell-centre value
    double B_other = 0.0;      ///< partner-side inverse distance
    double u_dot_nprime = 0.0;
    double drift = 0.0;
};

/// Pointwise reaction rate with analytic partials, evaluated at the current
/// iterate. Convention: the rate r is the outward flux of the solid-side
/// species, j_s·n|Γs = r = −j_f·n'|Γf for the restricted binary reaction.
struct RateEval {
    double r = 0.0;
    double dr_dcs = 0.0;
    double dr_dcf = 0.0;
};

/// Restricted binary reaction, fluid-side coefficients (one Newton step).
/// D_s, B_s refer to the solid side frozen at iterate N.
RobinCoeffs reactive_restricted_fluid(double D_f, double D_s, double B_s,
                                      double c_s_cell, double c_s_face_N,
                                      double c_f_face_N, double u_dot_nprime,
                                      double drift, const RateEval& rate);

/// Restricted binary reaction, solid-side coefficients.
RobinCoeffs reactive_restricted_solid(double D_s, double D_f, double B_f,
                                      double c_f_cell, double c_s_face_N,
                                      double c_f_face_N, double u_dot_nprime,
                                      double drift, const RateEval& rate);

/// Unrestricted species i (exists on both sides, value continuity plus flux
/// jump r_i). r_i follows the jump convention: sum of outward fluxes = r_i,
/// i.e. r_i = −(production of species i). dri_dci is ∂r_i/∂c_i at c^N; all
/// other species are frozen. D_own/D_other may differ per side.
RobinCoeffs reactive_unrestricted(double D_own, double D_other,
                                  const InterfaceFaceState& s, double r_i,
                                  double dri_dci);

// -- per-solve compiled boundary data ---------------------------------------

struct PatchCoeffs {
    bool periodic = false;
    std::vector<RobinAlphas> alphas; ///< per face, empty for periodic
};

/// Everything assembly needs to fold one field's boundary conditions.
struct FieldBCs {
    std::vector<PatchCoeffs> patches;
    std::vector<double> link_jump; ///< per periodic link: ghost-from-a offset

    static FieldBCs zero_gradient(const StructuredMesh& mesh);
};

/// Refreshes Field::bv from the compiled conditions (Robin patches) and the
/// interpolated link values (periodic patches).
void update_boundary_values(const StructuredMesh& mesh, const FieldBCs& bcs,
                            Field& f);

} // namespace pnp
