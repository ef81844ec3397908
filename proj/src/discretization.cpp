#include "pnp/discretization.hpp"

#include <cmath>

#include "pnp/errors.hpp"

namespace pnp {

FaceScalar FaceScalar::uniform(const StructuredMesh& mesh, double value) {
    FaceScalar s;
    s.face.assign(mesh.faces.size(), value);
    s.link.assign(mesh.periodic_links.size(), value);
    return s;
}

FaceScalar interpolate_to_faces(const StructuredMesh& mesh,
                                const std::vector<double>& cell_values,
                                bool harmonic) {
    auto blend = [harmonic](double a, double b) {
        if (!harmonic) return 0.5 * (a + b);
        return (a > 0.0 && b > 0.0) ? 2.0 * a * b / (a + b) : 0.0;
    };
    FaceScalar s;
    s.face.resize(mesh.faces.size());
    for (std::size_t fi = 0; fi < mesh.faces.size(); ++fi) {
        const Face& f = mesh.faces[fi];
        s.face[fi] = f.neighbour >= 0
                         ? blend(cell_values[f.owner], cell_values[f.neighbour])
                         : cell_values[f.owner];
    }
    s.link.resize(mesh.periodic_links.size());
    for (std::size_t l = 0; l < mesh.periodic_links.size(); ++l) {
        const PeriodicLink& k = mesh.periodic_links[l];
        s.link[l] = blend(cell_values[k.cell_a], cell_values[k.cell_b]);
    }
    return s;
}

void add_laplacian(LinearSystem& sys, const StructuredMesh& mesh,
                   const FaceScalar& gamma, const FieldBCs& bcs, double sign) {
    for (Index fi = 0; fi < mesh.n_internal; ++fi) {
        const Face& f = mesh.faces[fi];
        const double w = sign * gamma.face[fi] * f.area / f.dist;
        sys.add_diag(f.owner, w);
        sys.add(f.owner, f.neighbour, -w);
        sys.add_diag(f.neighbour, w);
        sys.add(f.neighbour, f.owner, -w);
    }
    for (std::size_t l = 0; l < mesh.periodic_links.size(); ++l) {
        const PeriodicLink& k = mesh.periodic_links[l];
        const double w = sign * gamma.link[l] * k.area / k.dist;
        const double jump = l < bcs.link_jump.size() ? bcs.link_jump[l] : 0.0;
        sys.add_diag(k.cell_a, w);
        sys.add(k.cell_a, k.cell_b, -w);
        sys.add_rhs(k.cell_a, w * jump);
        sys.add_diag(k.cell_b, w);
        sys.add(k.cell_b, k.cell_a, -w);
        sys.add_rhs(k.cell_b, -w * jump);
    }
    for (std::size_t p = 0; p < mesh.patches.size(); ++p) {
        const Patch& patch = mesh.patches[p];
        const PatchCoeffs& pc = bcs.patches[p];
        if (pc.periodic) continue;
        for (int k = 0; k < patch.size(); ++k) {
            const Face& f = mesh.faces[patch.faces[k]];
            const RobinAlphas& a = pc.alphas[k];
            const double gA = sign * gamma.face[patch.faces[k]] * f.area;
            // boundary flux γ A (a3 x_c + a4) leaves the cell
            sys.add_diag(f.owner, -gA * a.a3);
            sys.add_rhs(f.owner, gA * a.a4);
        }
    }
}

void add_convection(LinearSystem& sys, const StructuredMesh& mesh,
                    const FaceScalar& flux, ConvectionScheme scheme,
                    const FieldBCs& bcs) {
    const bool upwind = scheme == ConvectionScheme::upwind;
    for (Index fi = 0; fi < mesh.n_internal; ++fi) {
        const Face& f = mesh.faces[fi];
        const double q = flux.face[fi];
        double wo, wn; // x_f = wo x_O + wn x_N
        if (upwind) {
            wo = q > 0.0 ? 1.0 : 0.0;
            wn = 1.0 - wo;
        } else {
            wo = wn = 0.5;
        }
        sys.add_diag(f.owner, q * wo);
        sys.add(f.owner, f.neighbour, q * wn);
        sys.add_diag(f.neighbour, -q * wn);
        sys.add(f.neighbour, f.owner, -q * wo);
    }
    for (std::size_t l = 0; l < mesh.periodic_links.size(); ++l) {
        const PeriodicLink& k = mesh.periodic_links[l];
        const double q = flux.link[l];
        const double jump = l < bcs.link_jump.size() ? bcs.link_jump[l] : 0.0;
        double wa, wb;
        if (upwind) {
            wa = q > 0.0 ? 1.0 : 0.0;
            wb = 1.0 - wa;
        } else {
            wa = wb = 0.5;
        }
        // x_f seen from a: wa x_a + wb (x_b + jump)
        sys.add_diag(k.cell_a, q * wa);
        sys.add(k.cell_a, k.cell_b, q * wb);
        sys.add_rhs(k.cell_a, -q * wb * jump);
        sys.add_diag(k.cell_b, -q * wb);
        sys.add(k.cell_b, k.cell_a, -q * wa);
        sys.add_rhs(k.cell_b, q * wa * jump);
    }
    for (std::size_t p = 0; p < mesh.patches.size(); ++p) {
        const Patch& patch = mesh.patches[p];
        const PatchCoeffs& pc = bcs.patches[p];
        if (pc.periodic) continue;
        for (int k = 0; k < patch.size(); ++k) {
            const Face& f = mesh.faces[patch.faces[k]];
            const RobinAlphas& a = pc.alphas[k];
            const double q = flux.face[patch.faces[k]];
            sys.add_diag(f.owner, q * a.a1);
            sys.add_rhs(f.owner, -q * a.a2);
        }
    }
}

void add_ddt(LinearSystem& sys, const StructuredMesh& mesh, TimeScheme scheme,
             double dt, const std::vector<double>& x_old,
             const std::vector<double>* x_older, bool* fell_back) {
    if (scheme == TimeScheme::steady) return;
    if (dt <= 0.0) throw SolverError("add_ddt: dt must be positive");
    const bool bdf2 = scheme == TimeScheme::backward2 && x_older != nullptr;
    if (fell_back) *fell_back = (scheme == TimeScheme::backward2 && !bdf2);
    for (Index c = 0; c < mesh.n_cells(); ++c) {
        const double Vdt = mesh.cell_volumes[c] / dt;
        if (bdf2) {
            sys.add_diag(c, 1.5 * Vdt);
            sys.add_rhs(c, Vdt * (2.0 * x_old[c] - 0.5 * (*x_older)[c]));
        } else {
            sys.add_diag(c, Vdt);
            sys.add_rhs(c, Vdt * x_old[c]);
        }
    }
}

void add_source(LinearSystem& sys, const StructuredMesh& mesh,
                const std::vector<double>& source_density) {
    for (Index c = 0; c < mesh.n_cells(); ++c)
        sys.add_rhs(c, mesh.cell_volumes[c] * source_density[c]);
}

std::vector<std::array<double, 2>>
green_gauss_gradient(const StructuredMesh& mesh, const Field& f,
                     const FieldBCs& bcs) {
    std::vector<std::array<double, 2>> g(mesh.n_cells(), {0.0, 0.0});
    auto acc = [&](Index cell, const std::array<double, 2>& n, double area,
                   double value, double orient) {
        g[cell][0] += orient * value * area * n[0];
        g[cell][1] += orient * value * area * n[1];
    };
    for (Index fi = 0; fi < mesh.n_internal; ++fi) {
        const Face& face = mesh.faces[fi];
        const double xf = 0.5 * (f.v[face.owner] + f.v[face.neighbour]);
        acc(face.owner, face.normal, face.area, xf, 1.0);
        acc(face.neighbour, face.normal, face.area, xf, -1.0);
    }
    for (std::size_t l = 0; l < mesh.periodic_links.size(); ++l) {
        const PeriodicLink& k = mesh.periodic_links[l];
        const double jump = l < bcs.link_jump.size() ? bcs.link_jump[l] : 0.0;
        const double xa = 0.5 * (f.v[k.cell_a] + f.v[k.cell_b] + jump);
        acc(k.cell_a, k.normal, k.area, xa, 1.0);
        acc(k.cell_b, k.normal, k.area, xa - jump, -1.0);
    }
    for (std::size_t p = 0; p < mesh.patches.size(); ++p) {
        const Patch& patch = mesh.patches[p];
        if (patch.kind == PatchKind::periodic) continue;
        for (int k = 0; k < patch.size(); ++k) {
            const Face& face = mesh.faces[patch.faces[k]];
            acc(face.owner, face.normal, face.area, f.bv[p][k], 1.0);
        }
    }
    for (Index c = 0; c < mesh.n_cells(); ++c) {
        g[c][0] /= mesh.cell_volumes[c];
        g[c][1] /= mesh.cell_volumes[c];
    }
    return g;
}

FaceScalar face_normal_gradient(const StructuredMesh& mesh, const Field& f,
                                const FieldBCs& bcs) {
    FaceScalar s;
    s.face.assign(mesh.faces.size(), 0.0);
    for (Index fi = 0; fi < mesh.n_internal; ++fi) {
        const Face& face = mesh.faces[fi];
        s.face[fi] =
            face.area * (f.v[face.neighbour] - f.v[face.owner]) / face.dist;
    }
    s.link.resize(mesh.periodic_links.size());
    for (std::size_t l = 0; l < mesh.periodic_links.size(); ++l) {
        const PeriodicLink& k = mesh.periodic_links[l];
        const double jump = l < bcs.link_jump.size() ? bcs.link_jump[l] : 0.0;
        s.link[l] = k.area * (f.v[k.cell_b] + jump - f.v[k.cell_a]) / k.dist;
    }
    for (std::size_t p = 0; p < mesh.patches.size(); ++p) {
        const Patch& patch = mesh.patches[p];
        const PatchCoeffs& pc = bcs.patches[p];
        if (pc.periodic) continue;
        for (int k = 0; k < patch.size(); ++k) {
            const Face& face = mesh.faces[patch.faces[k]];
            const RobinAlphas& a = pc.alphas[k];
            s.face[patch.faces[k]] =
                face.area * (a.a3 * f.v[face.owner] + a.a4);
        }
    }
    return s;
}

std::vector<double> flux_divergence(const StructuredMesh& mesh,
                                    const FaceScalar& flux) {
    std::vector<double> div(mesh.n_cells(), 0.0);
    for (Index fi = 0; fi < mesh.n_internal; ++fi) {
        const Face& f = mesh.faces[fi];
        div[f.owner] += flux.face[fi];
        div[f.neighbour] -= flux.face[fi];
    }
    for (std::size_t l = 0; l < mesh.periodic_links.size(); ++l) {
        const PeriodicLink& k = mesh.periodic_links[l];
        div[k.cell_a] += flux.link[l];
        div[k.cell_b] -= flux.link[l];
    }
    for (const Patch& patch : mesh.patches) {
        if (patch.kind == PatchKind::periodic) continue;
        for (Index fid : patch.faces)
            div[mesh.faces[fid].owner] += flux.face[fid];
    }
    return div;
}

} // namespace pnp
