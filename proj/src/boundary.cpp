#include "pnp/boundary.hpp"

#include <cmath>

#include "pnp/errors.hpp"

namespace pnp {

RobinAlphas robin_alphas(const RobinCoeffs& c, double B,
                         const std::string& context) {
    const double den = c.D_star * B - c.K_star;
    const double scale = std::abs(c.D_star * B) + std::abs(c.K_star);
    if (std::abs(den) <= 1e-300 || std::abs(den) < 1e-12 * scale)
        throw BoundaryError("robin_alphas: degenerate condition (D*B - K* ~ 0)" +
                            (context.empty() ? "" : " on " + context));
    RobinAlphas a;
    a.a1 = c.D_star * B / den;
    a.a2 = c.F_star / den;
    a.a3 = c.K_star * B / den;
    a.a4 = c.F_star * B / den;
    return a;
}

RobinCoeffs dirichlet_coeffs(double value) { return {0.0, 1.0, -value}; }

RobinCoeffs fixed_gradient_coeffs(double gradient) {
    return {1.0, 0.0, gradient};
}

RobinCoeffs species_flux_coeffs(double D, double u_dot_n, double v_drift,
                                double j0) {
    // j·n = -D ∇_n c + (u·n + v_drift) c = j0
    return {D, u_dot_n + v_drift, -j0};
}

RobinCoeffs two_sided_diffusive_coeffs(double gamma_own, double gamma_other,
                                       double B_other, double other_cell_value,
                                       double source) {
    RobinCoeffs c;
    c.D_star = gamma_own;
    c.K_star = -gamma_other * B_other;
    c.F_star = gamma_other * B_other * other_cell_value + source;
    return c;
}

RobinCoeffs reactive_restricted_fluid(double D_f, double D_s, double B_s,
                                      double c_s_cell, double c_s_face_N,
                                      double c_f_face_N, double u_dot_nprime,
                                      double drift, const RateEval& rate) {
    const double den = D_s * B_s + rate.dr_dcs;
    if (den == 0.0)
        throw BoundaryError("reactive_restricted_fluid: zero denominator "
                            "D_s B_s + dr/dc_s");
    const double lin = rate.r - c_f_face_N * rate.dr_dcf
                              - c_s_face_N * rate.dr_dcs;
    RobinCoeffs c;
    c.D_star = D_f;
    c.K_star = -rate.dr_dcs * rate.dr_dcf / den + rate.dr_dcf
               - drift + u_dot_nprime;
    c.F_star = lin - rate.dr_dcs * (-D_s * B_s * c_s_cell + lin) / den;
    return c;
}

RobinCoeffs reactive_restricted_solid(double D_s, double D_f, double B_f,
                                      double c_f_cell, double c_s_face_N,
                                      double c_f_face_N, double u_dot_nprime,
                                      double drift, const RateEval& rate) {
    const double den = u_dot_nprime - D_f * B_f - drift + rate.dr_dcf;
    if (den == 0.0)
        throw BoundaryError("reactive_restricted_solid: zero denominator "
                            "u·n' - D_f B_f - drift + dr/dc_f");
    const double lin = -rate.r + c_f_face_N * rate.dr_dcf
                               + c_s_face_N * rate.dr_dcs;
    RobinCoeffs c;
    c.D_star = D_s;
    c.K_star = rate.dr_dcs * rate.dr_dcf / den - rate.dr_dcs;
    c.F_star = lin - rate.dr_dcf * (-D_f * B_f * c_f_cell + lin) / den;
    return c;
}

RobinCoeffs reactive_unrestricted(double D_own, double D_other,
                                  const InterfaceFaceState& s, double r_i,
                                  double dri_dci) {
    RobinCoeffs c;
    c.D_star = D_own;
    c.K_star = s.u_dot_nprime - D_other * s.B_other - s.drift - dri_dci;
    c.F_star = D_other * s.B_other * s.c_other_cell - r_i
               + s.c_own_face * dri_dci;
    return c;
}

FieldBCs FieldBCs::zero_gradient(const StructuredMesh& mesh) {
    FieldBCs bcs;
    bcs.patches.resize(mesh.patches.size());
    for (std::size_t p = 0; p < mesh.patches.size(); ++p) {
        const Patch& patch = mesh.patches[p];
        if (patch.kind == PatchKind::periodic) {
            bcs.patches[p].periodic = true;
            continue;
        }
        bcs.patches[p].alphas.assign(patch.faces.size(), RobinAlphas{});
    }
    bcs.link_jump.assign(mesh.periodic_links.size(), 0.0);
    return bcs;
}

void update_boundary_values(const StructuredMesh& mesh, const FieldBCs& bcs,
                            Field& f) {
    for (std::size_t p = 0; p < mesh.patches.size(); ++p) {
        const Patch& patch = mesh.patches[p];
        const PatchCoeffs& pc = bcs.patches[p];
        if (pc.periodic) continue;
        for (int k = 0; k < patch.size(); ++k) {
            const Face& face = mesh.faces[patch.faces[k]];
            const RobinAlphas& a = pc.alphas[k];
            f.bv[p][k] = a.a1 * f.v[face.owner] + a.a2;
        }
    }
    // periodic faces: distance-weighted interpolation across the link
    for (std::size_t l = 0; l < mesh.periodic_links.size(); ++l) {
        const PeriodicLink& link = mesh.periodic_links[l];
        const double jump = l < bcs.link_jump.size() ? bcs.link_jump[l] : 0.0;
        const double va = f.v[link.cell_a];
        const double vb = f.v[link.cell_b];
        const double mid = 0.5 * (va + vb + jump);
        for (std::size_t p = 0; p < mesh.patches.size(); ++p) {
            const Patch& patch = mesh.patches[p];
            if (patch.kind != PatchKind::periodic) continue;
            for (int k = 0; k < patch.size(); ++k) {
                if (patch.faces[k] == link.face_a) f.bv[p][k] = mid;
                if (patch.faces[k] == link.face_b) f.bv[p][k] = mid - jump;
            }
        }
    }
}

} // namespace pnp
