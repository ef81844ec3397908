#include "pnp/physics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include "pnp/errors.hpp"

namespace pnp {

namespace {

double max_abs(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

/// Relative change between two snapshots of the same field.
double rel_change(const std::vector<double>& now,
                  const std::vector<double>& before) {
    double num = 0.0;
    for (std::size_t i = 0; i < now.size(); ++i)
        num = std::max(num, std::abs(now[i] - before[i]));
    const double den = std::max({max_abs(now), max_abs(before), 1e-30});
    return num / den;
}

RobinCoeffs static_coeffs(const PatchBC& d, const std::string& context) {
    switch (d.kind) {
    case BCKind::zero_gradient: return zero_gradient_coeffs();
    case BCKind::dirichlet: return dirichlet_coeffs(d.value);
    case BCKind::fixed_gradient: return fixed_gradient_coeffs(d.value);
    case BCKind::flux:
        throw ConfigError("flux condition is only defined for species (" +
                          context + ")");
    }
    return {};
}

std::string solve_line(const std::string& field, const SolveReport& r) {
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "  %-12s initial %.6e  final %.6e  iters %d",
                  field.c_str(), r.initial_residual, r.final_residual,
                  r.iterations);
    return buf;
}

} // namespace

RegionState make_region(const StructuredMesh& mesh, RegionKind kind,
                        std::string name) {
    RegionState st;
    st.mesh = &mesh;
    st.kind = kind;
    st.name = std::move(name);
    st.u = VectorField(mesh, "u");
    st.p = Field(mesh, "p", 0.0, "Pa");
    st.phi = Field(mesh, "phi", 0.0, "V");
    st.face_flux = FaceScalar::uniform(mesh, 0.0);
    st.phi_link_jump.assign(mesh.periodic_links.size(), 0.0);
    const std::size_t np = mesh.patches.size();
    st.ux_bc.resize(np);
    st.uy_bc.resize(np);
    st.p_bc.resize(np);
    st.phi_bc.resize(np);
    for (std::size_t p = 0; p < np; ++p) {
        const PatchKind k = mesh.patches[p].kind;
        if (k == PatchKind::wall || k == PatchKind::interface_) {
            st.ux_bc[p] = {BCKind::dirichlet, 0.0}; // no slip
            st.uy_bc[p] = {BCKind::dirichlet, 0.0};
        }
    }
    st.phi_coupled.assign(np, 0);
    compile_static_bcs(st);
    return st;
}

int add_species(RegionState& st, const SpeciesDef& def, double c0) {
    const StructuredMesh& mesh = *st.mesh;
    st.species.push_back(def);
    st.c.emplace_back(mesh, def.name, c0, "mol/m^3");
    std::vector<PatchBC> row(mesh.patches.size());
    for (std::size_t p = 0; p < mesh.patches.size(); ++p) {
        const PatchKind k = mesh.patches[p].kind;
        row[p] = (k == PatchKind::inlet || k == PatchKind::outlet)
                     ? PatchBC{BCKind::zero_gradient, 0.0}
                     : PatchBC{BCKind::flux, 0.0};
    }
    st.c_bc.push_back(std::move(row));
    st.c_bcs.push_back(FieldBCs::zero_gradient(mesh));
    st.c_coupled.emplace_back(mesh.patches.size(), 0);
    st.c_old.emplace_back(mesh.n_cells(), c0);
    st.c_older.emplace_back(mesh.n_cells(), c0);
    const int idx = static_cast<int>(st.species.size()) - 1;
    compile_species_bcs(st, idx);
    return idx;
}

void compile_static_bcs(RegionState& st) {
    const StructuredMesh& mesh = *st.mesh;
    auto compile = [&](const std::vector<PatchBC>& desc, FieldBCs& bcs,
                       const std::string& field,
                       const std::vector<double>* jumps,
                       const std::vector<char>* coupled) {
        bcs.patches.resize(mesh.patches.size());
        for (std::size_t p = 0; p < mesh.patches.size(); ++p) {
            const Patch& patch = mesh.patches[p];
            PatchCoeffs& pc = bcs.patches[p];
            if (patch.kind == PatchKind::periodic) {
                pc.periodic = true;
                pc.alphas.clear();
                continue;
            }
            if (coupled && p < coupled->size() && (*coupled)[p]) continue;
            pc.alphas.resize(patch.size());
            const RobinCoeffs rc =
                static_coeffs(desc[p], field + " patch " + patch.name);
            for (int k = 0; k < patch.size(); ++k)
                pc.alphas[k] =
                    robin_alphas(rc, patch.B[k], field + " patch " + patch.name);
        }
        bcs.link_jump.assign(mesh.periodic_links.size(), 0.0);
        if (jumps)
            for (std::size_t l = 0;
                 l < std::min(jumps->size(), bcs.link_jump.size()); ++l)
                bcs.link_jump[l] = (*jumps)[l];
    };
    compile(st.ux_bc, st.ux_bcs, "u_x", nullptr, nullptr);
    compile(st.uy_bc, st.uy_bcs, "u_y", nullptr, nullptr);
    compile(st.p_bc, st.p_bcs, "p", nullptr, nullptr);
    compile(st.phi_bc, st.phi_bcs, "phi", &st.phi_link_jump, &st.phi_coupled);
    st.stokes_cache.reset(); // flow operator depends on the compiled data
    update_boundary_values(mesh, st.ux_bcs, st.u.x);
    update_boundary_values(mesh, st.uy_bcs, st.u.y);
    update_boundary_values(mesh, st.p_bcs, st.p);
    update_boundary_values(mesh, st.phi_bcs, st.phi);
}

void compile_species_bcs(RegionState& st, int i) {
    const StructuredMesh& mesh = *st.mesh;
    const SpeciesDef& sp = st.species[i];
    FieldBCs& bcs = st.c_bcs[i];
    bcs.patches.resize(mesh.patches.size());
    bcs.link_jump.assign(mesh.periodic_links.size(), 0.0);
    const bool fluid = st.kind == RegionKind::fluid;
    FaceScalar gphi;
    const double mig = -sp.z * sp.D * st.pc.F / (st.pc.R * st.pc.T);
    if (fluid && sp.z != 0)
        gphi = face_normal_gradient(mesh, st.phi, st.phi_bcs);
    for (std::size_t p = 0; p < mesh.patches.size(); ++p) {
        const Patch& patch = mesh.patches[p];
        PatchCoeffs& pc = bcs.patches[p];
        if (patch.kind == PatchKind::periodic) {
            pc.periodic = true;
            pc.alphas.clear();
            continue;
        }
        if (st.c_coupled[i][p]) continue;
        pc.alphas.resize(patch.size());
        const std::string ctx = sp.name + " patch " + patch.name;
        for (int k = 0; k < patch.size(); ++k) {
            const PatchBC& d = st.c_bc[i][p];
            if (d.kind != BCKind::flux) {
                pc.alphas[k] = robin_alphas(static_coeffs(d, ctx),
                                            patch.B[k], ctx);
                continue;
            }
            const Index fid = patch.faces[k];
            const double area = mesh.faces[fid].area;
            const double u_n = fluid ? st.face_flux.face[fid] / area : 0.0;
            const double v_drift =
                (fluid && sp.z != 0) ? mig * gphi.face[fid] / area : 0.0;
            pc.alphas[k] = robin_alphas(
                species_flux_coeffs(sp.D, u_n, v_drift, d.value), patch.B[k],
                ctx);
        }
    }
    update_boundary_values(mesh, bcs, st.c[i]);
}

std::vector<double> charge_density(const RegionState& st) {
    std::vector<double> rho(st.mesh->n_cells(), 0.0);
    for (std::size_t i = 0; i < st.species.size(); ++i) {
        const double zF = st.pc.F * st.species[i].z;
        if (zF == 0.0) continue;
        for (Index c = 0; c < st.mesh->n_cells(); ++c)
            rho[c] += zF * st.c[i].v[c];
    }
    return rho;
}

double total_moles(const RegionState& st, int i) {
    double m = 0.0;
    for (Index c = 0; c < st.mesh->n_cells(); ++c)
        m += st.c[i].v[c] * st.mesh->cell_volumes[c];
    return m;
}

void set_uniform_flow(RegionState& st, double ux, double uy) {
    const StructuredMesh& mesh = *st.mesh;
    std::fill(st.u.x.v.begin(), st.u.x.v.end(), ux);
    std::fill(st.u.y.v.begin(), st.u.y.v.end(), uy);
    for (std::size_t p = 0; p < mesh.patches.size(); ++p) {
        std::fill(st.u.x.bv[p].begin(), st.u.x.bv[p].end(), ux);
        std::fill(st.u.y.bv[p].begin(), st.u.y.bv[p].end(), uy);
    }
    for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
        const Face& face = mesh.faces[f];
        st.face_flux.face[f] =
            (ux * face.normal[0] + uy * face.normal[1]) * face.area;
    }
    for (std::size_t l = 0; l < mesh.periodic_links.size(); ++l) {
        const PeriodicLink& k = mesh.periodic_links[l];
        st.face_flux.link[l] = (ux * k.normal[0] + uy * k.normal[1]) * k.area;
    }
}

void advance_history(RegionState& st) {
    for (std::size_t i = 0; i < st.species.size(); ++i) {
        st.c_older[i] = st.c_old[i];
        st.c_old[i] = st.c[i].v;
    }
    st.have_older = true;
}

SolveReport gauge_aware_solve(LinearSystem& sys, std::vector<double>& x,
                              SolveControls controls, bool allow_gauge,
                              const std::string& context) {
    double max_row = 0.0, max_diag = 0.0;
    for (Index r = 0; r < sys.rows(); ++r) {
        max_row = std::max(max_row, std::abs(sys.row_sum(r)));
        max_diag = std::max(max_diag, std::abs(sys.diag(r)));
    }
    if (max_row <= 1e-8 * max_diag) {
        if (!allow_gauge)
            throw ConfigError(
                context + ": boundary conditions fix no reference value "
                          "(all-Neumann/periodic operator); add a fixed-value "
                          "condition or a reference");
        sys.set_identity_row(0, 0.0);
        controls.method = KrylovMethod::bicgstab; // pinned row breaks symmetry
    }
    return solve(sys, x, controls);
}

MomentumSplit momentum_predict(RegionState& st, const std::array<double, 2>& J,
                               const SolveControls& controls,
                               std::vector<SolveReport>* reports) {
    if (st.kind != RegionKind::fluid)
        throw ConfigError("momentum_predict: region '" + st.name +
                          "' is not a fluid region");
    const StructuredMesh& mesh = *st.mesh;
    const Index n = mesh.n_cells();
    const std::vector<double> rho = charge_density(st);
    const auto gphi = green_gauss_gradient(mesh, st.phi, st.phi_bcs);
    const auto gp = green_gauss_gradient(mesh, st.p, st.p_bcs);

    MomentumSplit split;
    auto component = [&](Field& comp, const FieldBCs& bcs, int axis,
                         std::vector<double>& A, std::vector<double>& w) {
        LinearSystem sys(mesh);
        add_laplacian(sys, mesh, FaceScalar::uniform(mesh, st.mu), bcs);
        for (Index c = 0; c < n; ++c) {
            const double V = mesh.cell_volumes[c];
            const double force = -(rho[c] * gphi[c][axis] + J[axis]);
            sys.add_rhs(c, V * (force - gp[c][axis]));
        }
        const SolveReport rep = solve(sys, comp.v, controls);
        if (reports) reports->push_back(rep);
        update_boundary_values(mesh, bcs, comp);
        A.resize(n);
        w.resize(n);
        std::vector<double> h(n);
        sys.offdiag_action(comp.v, h);
        for (Index c = 0; c < n; ++c) {
            A[c] = sys.diag(c);
            const double V = mesh.cell_volumes[c];
            // pressure-free pseudo-velocity: add the pressure part back out
            w[c] = (h[c] + sys.rhs()[c] + V * gp[c][axis]) / A[c];
        }
    };
    component(st.u.x, st.ux_bcs, 0, split.Ax, split.wx);
    component(st.u.y, st.uy_bcs, 1, split.Ay, split.wy);
    return split;
}

namespace {

int axis_of(const std::array<double, 2>& nrm) {
    return std::abs(nrm[0]) > 0.5 ? 0 : 1;
}

/// (V/A)_f per face, picking the normal component's diagonal (faces are
/// axis-aligned); boundary faces take the owner value.
FaceScalar rda_coefficients(const StructuredMesh& mesh,
                            const std::vector<double>& rDx,
                            const std::vector<double>& rDy) {
    FaceScalar rDA;
    rDA.face.resize(mesh.faces.size());
    rDA.link.resize(mesh.periodic_links.size());
    for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
        const Face& face = mesh.faces[f];
        const auto& rd = axis_of(face.normal) == 0 ? rDx : rDy;
        rDA.face[f] = face.neighbour >= 0
                          ? 0.5 * (rd[face.owner] + rd[face.neighbour])
                          : rd[face.owner];
    }
    for (std::size_t l = 0; l < mesh.periodic_links.size(); ++l) {
        const PeriodicLink& k = mesh.periodic_links[l];
        const auto& rd = axis_of(k.normal) == 0 ? rDx : rDy;
        rDA.link[l] = 0.5 * (rd[k.cell_a] + rd[k.cell_b]);
    }
    return rDA;
}

/// Pseudo-velocity face flux: linear interpolation on internal faces and
/// links, velocity boundary values on boundary faces.
FaceScalar pseudo_flux(const RegionState& st, const std::vector<double>& wx,
                       const std::vector<double>& wy) {
    const StructuredMesh& mesh = *st.mesh;
    FaceScalar flux_w;
    flux_w.face.assign(mesh.faces.size(), 0.0);
    flux_w.link.assign(mesh.periodic_links.size(), 0.0);
    for (Index f = 0; f < mesh.n_internal; ++f) {
        const Face& face = mesh.faces[f];
        const double fx = 0.5 * (wx[face.owner] + wx[face.neighbour]);
        const double fy = 0.5 * (wy[face.owner] + wy[face.neighbour]);
        flux_w.face[f] =
            (fx * face.normal[0] + fy * face.normal[1]) * face.area;
    }
    for (std::size_t l = 0; l < mesh.periodic_links.size(); ++l) {
        const PeriodicLink& k = mesh.periodic_links[l];
        const double fx = 0.5 * (wx[k.cell_a] + wx[k.cell_b]);
        const double fy = 0.5 * (wy[k.cell_a] + wy[k.cell_b]);
        flux_w.link[l] = (fx * k.normal[0] + fy * k.normal[1]) * k.area;
    }
    for (std::size_t p = 0; p < mesh.patches.size(); ++p) {
        const Patch& patch = mesh.patches[p];
        if (patch.kind == PatchKind::periodic) continue;
        for (int k = 0; k < patch.size(); ++k) {
            const Index fid = patch.faces[k];
            const Face& face = mesh.faces[fid];
            flux_w.face[fid] = (st.u.x.bv[p][k] * face.normal[0] +
                                st.u.y.bv[p][k] * face.normal[1]) *
                               face.area;
        }
    }
    return flux_w;
}

/// Subtracts the compact pressure gradient from the pseudo-flux, installs
/// the conservative flux and returns max_c|∇·U| / max_f|U_f|.
double install_corrected_flux(RegionState& st, const FaceScalar& flux_w,
                              const FaceScalar& rDA) {
    const StructuredMesh& mesh = *st.mesh;
    const FaceScalar gpA = face_normal_gradient(mesh, st.p, st.p_bcs);
    st.face_flux = flux_w;
    for (std::size_t f = 0; f < mesh.faces.size(); ++f)
        st.face_flux.face[f] -= rDA.face[f] * gpA.face[f];
    for (std::size_t l = 0; l < mesh.periodic_links.size(); ++l)
        st.face_flux.link[l] -= rDA.link[l] * gpA.link[l];
    const std::vector<double> div = flux_divergence(mesh, st.face_flux);
    double scale = 0.0;
    for (double q : st.face_flux.face) scale = std::max(scale, std::abs(q));
    for (double q : st.face_flux.link) scale = std::max(scale, std::abs(q));
    return max_abs(div) / std::max(scale, 1e-300);
}

} // namespace

SolveReport pressure_correct(RegionState& st, const MomentumSplit& split,
                             const SolveControls& controls, double* max_div) {
    if (st.kind != RegionKind::fluid)
        throw ConfigError("pressure_correct: region '" + st.name +
                          "' is not a fluid region");
    const StructuredMesh& mesh = *st.mesh;
    const Index n = mesh.n_cells();
    std::vector<double> rDx(n), rDy(n);
    for (Index c = 0; c < n; ++c) {
        rDx[c] = mesh.cell_volumes[c] / split.Ax[c];
        rDy[c] = mesh.cell_volumes[c] / split.Ay[c];
    }
    const FaceScalar rDA = rda_coefficients(mesh, rDx, rDy);
    const FaceScalar flux_w = pseudo_flux(st, split.wx, split.wy);

    const std::vector<double> div_w = flux_divergence(mesh, flux_w);
    LinearSystem sys(mesh);
    add_laplacian(sys, mesh, rDA, st.p_bcs);
    for (Index c = 0; c < n; ++c) sys.add_rhs(c, -div_w[c]);
    const SolveReport rep =
        gauge_aware_solve(sys, st.p.v, controls, true,
                          "pressure (" + st.name + ")");
    update_boundary_values(mesh, st.p_bcs, st.p);

    // conservative corrected flux, consistent with the assembled operator
    const double mdiv = install_corrected_flux(st, flux_w, rDA);
    if (max_div) *max_div = mdiv;

    const auto gp = green_gauss_gradient(mesh, st.p, st.p_bcs);
    for (Index c = 0; c < n; ++c) {
        st.u.x.v[c] = split.wx[c] - rDx[c] * gp[c][0];
        st.u.y.v[c] = split.wy[c] - rDy[c] * gp[c][1];
    }
    update_boundary_values(mesh, st.ux_bcs, st.u.x);
    update_boundary_values(mesh, st.uy_bcs, st.u.y);
    return rep;
}

/// Precomputed coupled-Stokes operator for one region: sparse factorisation
/// of [momentum_x, momentum_y, stabilised continuity], the static part of
/// the right-hand side (boundary folds), and the interpolation coefficients
/// needed to rebuild the conservative face flux after a solve.
struct StokesCache {
    /// row/column-equilibrated operator M' = Dr M Dc; the solve maps
    /// b -> Dc lu(Dr b). Equilibration matters: momentum and continuity
    /// entries differ by many orders of magnitude in SI units.
    Eigen::SparseMatrix<double> M;
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    Eigen::VectorXd row_scale, col_scale;
    std::vector<double> rhs_const;
    std::vector<double> rDx, rDy;
    FaceScalar rDA;
    std::array<bool, 3> pinned{}; ///< per block: gauge row installed

    Eigen::VectorXd solve(const Eigen::VectorXd& b) const {
        return col_scale.cwiseProduct(
            lu.solve(Eigen::VectorXd(row_scale.cwiseProduct(b))));
    }
    Eigen::VectorXd residual(const Eigen::VectorXd& b,
                             const Eigen::VectorXd& x) const {
        const Eigen::VectorXd mx = row_scale.cwiseInverse().cwiseProduct(
            Eigen::VectorXd(M * Eigen::VectorXd(
                                    col_scale.cwiseInverse().cwiseProduct(x))));
        return b - mx;
    }
};

namespace {

/// Linear stencil of one component of the Green-Gauss cell gradient:
/// grad_axis(p)[c] = Σ_j rows[c][j] p_j + c0[c], boundary and periodic-jump
/// folds included. Mirrors green_gauss_gradient exactly.
void gradient_operator(const StructuredMesh& mesh, const FieldBCs& bcs,
                       int axis, std::vector<std::map<Index, double>>& rows,
                       std::vector<double>& c0) {
    const Index n = mesh.n_cells();
    rows.assign(n, {});
    c0.assign(n, 0.0);
    for (Index fi = 0; fi < mesh.n_internal; ++fi) {
        const Face& f = mesh.faces[fi];
        const double coef = f.normal[axis] * f.area;
        if (coef == 0.0) continue;
        rows[f.owner][f.owner] += 0.5 * coef;
        rows[f.owner][f.neighbour] += 0.5 * coef;
        rows[f.neighbour][f.owner] -= 0.5 * coef;
        rows[f.neighbour][f.neighbour] -= 0.5 * coef;
    }
    for (std::size_t l = 0; l < mesh.periodic_links.size(); ++l) {
        const PeriodicLink& k = mesh.periodic_links[l];
        const double coef = k.normal[axis] * k.area;
        if (coef == 0.0) continue;
        const double jump = l < bcs.link_jump.size() ? bcs.link_jump[l] : 0.0;
        // face value seen from a: (x_a + x_b + jump)/2; the b side removes
        // the jump again
        rows[k.cell_a][k.cell_a] += 0.5 * coef;
        rows[k.cell_a][k.cell_b] += 0.5 * coef;
        c0[k.cell_a] += 0.5 * coef * jump;
        rows[k.cell_b][k.cell_a] -= 0.5 * coef;
        rows[k.cell_b][k.cell_b] -= 0.5 * coef;
        c0[k.cell_b] += 0.5 * coef * jump;
    }
    for (std::size_t p = 0; p < mesh.patches.size(); ++p) {
        const Patch& patch = mesh.patches[p];
        const PatchCoeffs& pc = bcs.patches[p];
        if (pc.periodic) continue;
        for (int k = 0; k < patch.size(); ++k) {
            const Face& f = mesh.faces[patch.faces[k]];
            const double coef = f.normal[axis] * f.area;
            if (coef == 0.0) continue;
            const RobinAlphas& a = pc.alphas[k];
            rows[f.owner][f.owner] += coef * a.a1;
            c0[f.owner] += coef * a.a2;
        }
    }
    for (Index c = 0; c < n; ++c) {
        const double inv = 1.0 / mesh.cell_volumes[c];
        for (auto& [col, w] : rows[c]) w *= inv;
        c0[c] *= inv;
    }
}

bool operator_singular(const LinearSystem& sys) {
    double max_row = 0.0, max_diag = 0.0;
    for (Index r = 0; r < sys.rows(); ++r) {
        max_row = std::max(max_row, std::abs(sys.row_sum(r)));
        max_diag = std::max(max_diag, std::abs(sys.diag(r)));
    }
    return max_row <= 1e-8 * max_diag;
}

/// Assembles and factorises the coupled operator. Unknown ordering:
/// u_x cells, then u_y cells, then p cells.
std::shared_ptr<StokesCache> build_stokes_cache(const RegionState& st) {
    const StructuredMesh& mesh = *st.mesh;
    const Index n = mesh.n_cells();
    auto cache = std::make_shared<StokesCache>();

    LinearSystem Sx(mesh), Sy(mesh);
    add_laplacian(Sx, mesh, FaceScalar::uniform(mesh, st.mu), st.ux_bcs);
    add_laplacian(Sy, mesh, FaceScalar::uniform(mesh, st.mu), st.uy_bcs);
    cache->rDx.resize(n);
    cache->rDy.resize(n);
    for (Index c = 0; c < n; ++c) {
        cache->rDx[c] = mesh.cell_volumes[c] / Sx.diag(c);
        cache->rDy[c] = mesh.cell_volumes[c] / Sy.diag(c);
    }
    cache->rDA = rda_coefficients(mesh, cache->rDx, cache->rDy);
    LinearSystem Lp(mesh);
    add_laplacian(Lp, mesh, cache->rDA, st.p_bcs);

    // a singular block (all-periodic velocity, all-Neumann pressure) gets
    // its first row pinned; the pressure pin matches the segregated gauge
    cache->pinned = {operator_singular(Sx), operator_singular(Sy),
                     operator_singular(Lp)};
    auto pinned_row = [&](Index r) {
        const int blk = static_cast<int>(r / n);
        return cache->pinned[blk] && r == static_cast<Index>(blk) * n;
    };

    std::vector<Eigen::Triplet<double>> trips;
    std::vector<double>& b0 = cache->rhs_const;
    b0.assign(static_cast<std::size_t>(3) * n, 0.0);
    auto push = [&](Index r, Index c, double v) {
        if (v != 0.0 && !pinned_row(r)) trips.emplace_back(r, c, v);
    };

    // momentum operators and their boundary folds
    Sx.for_each_entry([&](Index r, Index c, double v) { push(r, c, v); });
    Sy.for_each_entry(
        [&](Index r, Index c, double v) { push(n + r, n + c, v); });
    for (Index c = 0; c < n; ++c) {
        b0[c] += Sx.rhs()[c];
        b0[n + c] += Sy.rhs()[c];
    }

    // V ∇p coupling in the momentum rows (Green-Gauss gradient times V)
    std::array<std::vector<std::map<Index, double>>, 2> gmat;
    std::array<std::vector<double>, 2> gconst;
    for (int d = 0; d < 2; ++d)
        gradient_operator(mesh, st.p_bcs, d, gmat[d], gconst[d]);
    for (int d = 0; d < 2; ++d)
        for (Index c = 0; c < n; ++c) {
            const double V = mesh.cell_volumes[c];
            for (const auto& [col, w] : gmat[d][c])
                push(d * n + c, 2 * n + col, V * w);
            b0[d * n + c] -= V * gconst[d][c];
        }

    // continuity rows: compact pressure operator ...
    Lp.for_each_entry(
        [&](Index r, Index c, double v) { push(2 * n + r, 2 * n + c, v); });
    for (Index c = 0; c < n; ++c) b0[2 * n + c] += Lp.rhs()[c];

    // ... plus the divergence of the interpolated pseudo-velocity
    // w = u + (V/A) grad p; each face side contributes sign·coef·w_d(cell)
    auto wide = [&](Index row_cell, double sign, Index cell, int d,
                    double coef) {
        push(2 * n + row_cell, d * n + cell, sign * coef);
        const double rd = (d == 0 ? cache->rDx : cache->rDy)[cell];
        for (const auto& [col, w] : gmat[d][cell])
            push(2 * n + row_cell, 2 * n + col, sign * coef * rd * w);
        b0[2 * n + row_cell] -= sign * coef * rd * gconst[d][cell];
    };
    for (Index fi = 0; fi < mesh.n_internal; ++fi) {
        const Face& f = mesh.faces[fi];
        const int d = axis_of(f.normal);
        const double coef = 0.5 * f.normal[d] * f.area;
        wide(f.owner, 1.0, f.owner, d, coef);
        wide(f.owner, 1.0, f.neighbour, d, coef);
        wide(f.neighbour, -1.0, f.owner, d, coef);
        wide(f.neighbour, -1.0, f.neighbour, d, coef);
    }
    for (const PeriodicLink& k : mesh.periodic_links) {
        const int d = axis_of(k.normal);
        const double coef = 0.5 * k.normal[d] * k.area;
        wide(k.cell_a, 1.0, k.cell_a, d, coef);
        wide(k.cell_a, 1.0, k.cell_b, d, coef);
        wide(k.cell_b, -1.0, k.cell_a, d, coef);
        wide(k.cell_b, -1.0, k.cell_b, d, coef);
    }
    // boundary faces carry the velocity boundary flux (a1 u_c + a2)·n A
    for (std::size_t p = 0; p < mesh.patches.size(); ++p) {
        const Patch& patch = mesh.patches[p];
        if (patch.kind == PatchKind::periodic) continue;
        for (int k = 0; k < patch.size(); ++k) {
            const Face& f = mesh.faces[patch.faces[k]];
            const int d = axis_of(f.normal);
            const double coef = f.normal[d] * f.area;
            const RobinAlphas& a =
                (d == 0 ? st.ux_bcs : st.uy_bcs).patches[p].alphas[k];
            push(2 * n + f.owner, d * n + f.owner, coef * a.a1);
            b0[2 * n + f.owner] -= coef * a.a2;
        }
    }

    for (int blk = 0; blk < 3; ++blk)
        if (cache->pinned[blk]) {
            trips.emplace_back(blk * n, blk * n, 1.0);
            b0[static_cast<std::size_t>(blk) * n] = 0.0;
        }

    cache->M.resize(3 * n, 3 * n);
    cache->M.setFromTriplets(trips.begin(), trips.end());
    cache->M.makeCompressed();

    // equilibrate: rows to unit max magnitude, then columns
    Eigen::VectorXd& rs = cache->row_scale;
    Eigen::VectorXd& cs = cache->col_scale;
    rs = Eigen::VectorXd::Zero(3 * n);
    cs = Eigen::VectorXd::Zero(3 * n);
    for (int k = 0; k < cache->M.outerSize(); ++k)
        for (Eigen::SparseMatrix<double>::InnerIterator it(cache->M, k); it;
             ++it)
            rs[it.row()] = std::max(rs[it.row()], std::abs(it.value()));
    for (Index r = 0; r < 3 * n; ++r) rs[r] = rs[r] > 0.0 ? 1.0 / rs[r] : 1.0;
    for (int k = 0; k < cache->M.outerSize(); ++k)
        for (Eigen::SparseMatrix<double>::InnerIterator it(cache->M, k); it;
             ++it) {
            it.valueRef() *= rs[it.row()];
            cs[it.col()] = std::max(cs[it.col()], std::abs(it.value()));
        }
    for (Index c = 0; c < 3 * n; ++c) cs[c] = cs[c] > 0.0 ? 1.0 / cs[c] : 1.0;
    for (int k = 0; k < cache->M.outerSize(); ++k)
        for (Eigen::SparseMatrix<double>::InnerIterator it(cache->M, k); it;
             ++it)
            it.valueRef() *= cs[it.col()];

    cache->lu.compute(cache->M);
    if (cache->lu.info() != Eigen::Success)
        throw SolverError("coupled Stokes operator for region '" + st.name +
                          "' is singular; the velocity or pressure boundary "
                          "conditions leave the problem underdetermined");
    return cache;
}

} // namespace

std::array<SolveReport, 3> stokes_solve_coupled(RegionState& st,
                                                const std::array<double, 2>& J,
                                                double* max_div) {
    if (st.kind != RegionKind::fluid)
        throw ConfigError("stokes_solve_coupled: region '" + st.name +
                          "' is not a fluid region");
    const StructuredMesh& mesh = *st.mesh;
    const Index n = mesh.n_cells();
    if (!st.stokes_cache) st.stokes_cache = build_stokes_cache(st);
    const StokesCache& cache = *st.stokes_cache;

    Eigen::VectorXd b = Eigen::Map<const Eigen::VectorXd>(
        cache.rhs_const.data(), 3 * n);
    const std::vector<double> rho = charge_density(st);
    const auto gphi = green_gauss_gradient(mesh, st.phi, st.phi_bcs);
    for (Index c = 0; c < n; ++c) {
        const double V = mesh.cell_volumes[c];
        b[c] -= V * (rho[c] * gphi[c][0] + J[0]);
        b[n + c] -= V * (rho[c] * gphi[c][1] + J[1]);
    }
    for (int blk = 0; blk < 3; ++blk)
        if (cache.pinned[blk]) b[blk * n] = 0.0;

    Eigen::VectorXd x(3 * n);
    for (Index c = 0; c < n; ++c) {
        x[c] = st.u.x.v[c];
        x[n + c] = st.u.y.v[c];
        x[2 * n + c] = st.p.v[c];
    }
    const Eigen::VectorXd r0 = cache.residual(b, x);
    x = cache.solve(b);
    const Eigen::VectorXd r1 = cache.residual(b, x);

    for (Index c = 0; c < n; ++c) {
        st.u.x.v[c] = x[c];
        st.u.y.v[c] = x[n + c];
        st.p.v[c] = x[2 * n + c];
    }
    update_boundary_values(mesh, st.ux_bcs, st.u.x);
    update_boundary_values(mesh, st.uy_bcs, st.u.y);
    update_boundary_values(mesh, st.p_bcs, st.p);

    // conservative flux, built exactly like the segregated corrector's
    const auto gp = green_gauss_gradient(mesh, st.p, st.p_bcs);
    std::vector<double> wx(n), wy(n);
    for (Index c = 0; c < n; ++c) {
        wx[c] = st.u.x.v[c] + cache.rDx[c] * gp[c][0];
        wy[c] = st.u.y.v[c] + cache.rDy[c] * gp[c][1];
    }
    const double mdiv =
        install_corrected_flux(st, pseudo_flux(st, wx, wy), cache.rDA);
    if (max_div) *max_div = mdiv;

    std::array<SolveReport, 3> reports;
    for (int blk = 0; blk < 3; ++blk) {
        SolveReport& rep = reports[blk];
        rep.initial_residual = r0.segment(blk * n, n).norm();
        rep.final_residual = r1.segment(blk * n, n).norm();
        rep.iterations = 1;
        rep.converged = true;
    }
    return reports;
}

SolveReport solve_potential(RegionState& st, const SolveControls& controls,
                            double charge_response) {
    const StructuredMesh& mesh = *st.mesh;
    if (st.eps <= 0.0)
        throw ConfigError("solve_potential: region '" + st.name +
                          "' has no positive permittivity");
    LinearSystem sys(mesh);
    add_laplacian(sys, mesh, FaceScalar::uniform(mesh, st.eps), st.phi_bcs);
    add_source(sys, mesh, charge_density(st));
    if (charge_response > 0.0) {
        const double fac =
            charge_response * st.pc.F * st.pc.F / (st.pc.R * st.pc.T);
        for (Index c = 0; c < mesh.n_cells(); ++c) {
            double w = 0.0;
            for (std::size_t i = 0; i < st.species.size(); ++i)
                w += st.species[i].z * st.species[i].z * st.c[i].v[c];
            const double wV = fac * w * mesh.cell_volumes[c];
            sys.add_diag(c, wV);
            sys.add_rhs(c, wV * st.phi.v[c]);
        }
    }
    const SolveReport rep =
        gauge_aware_solve(sys, st.phi.v, controls, false,
                          "potential (" + st.name + ")");
    update_boundary_values(mesh, st.phi_bcs, st.phi);
    return rep;
}

SolveReport solve_species(RegionState& st, int i, TimeScheme scheme, double dt,
                          ConvectionScheme convection,
                          const SolveControls& controls) {
    const StructuredMesh& mesh = *st.mesh;
    const SpeciesDef& sp = st.species[i];
    compile_species_bcs(st, i);
    LinearSystem sys(mesh);
    add_ddt(sys, mesh, scheme, dt, st.c_old[i],
            st.have_older ? &st.c_older[i] : nullptr);
    if (st.kind == RegionKind::fluid) {
        FaceScalar flux = st.face_flux;
        if (sp.z != 0) {
            const FaceScalar gphi =
                face_normal_gradient(mesh, st.phi, st.phi_bcs);
            const double mig = -sp.z * sp.D * st.pc.F / (st.pc.R * st.pc.T);
            for (std::size_t f = 0; f < flux.face.size(); ++f)
                flux.face[f] += mig * gphi.face[f];
            for (std::size_t l = 0; l < flux.link.size(); ++l)
                flux.link[l] += mig * gphi.link[l];
        }
        add_convection(sys, mesh, flux, convection, st.c_bcs[i]);
    }
    add_laplacian(sys, mesh, FaceScalar::uniform(mesh, sp.D), st.c_bcs[i]);

    // A steady transport operator whose boundaries are all closed to this
    // species conserves mass exactly, so its column sums vanish and the
    // solutions form a ray (scaling a solution is again a solution). Pin
    // the richest cell to make the solve well posed, then rescale so the
    // region holds the same amount as the previous state.
    bool mass_gauge = false;
    double target_amount = 0.0;
    if (scheme == TimeScheme::steady) {
        std::vector<double> col(mesh.n_cells(), 0.0);
        sys.for_each_entry(
            [&](Index, Index cc, double v) { col[cc] += v; });
        double max_col = 0.0, max_diag = 0.0;
        for (Index c = 0; c < mesh.n_cells(); ++c) {
            max_col = std::max(max_col, std::abs(col[c]));
            max_diag = std::max(max_diag, std::abs(sys.diag(c)));
        }
        if (max_col <= 1e-8 * max_diag) {
            Index pin = 0;
            for (Index c = 0; c < mesh.n_cells(); ++c) {
                target_amount += st.c_old[i][c] * mesh.cell_volumes[c];
                if (std::abs(st.c[i].v[c]) > std::abs(st.c[i].v[pin]))
                    pin = c;
            }
            sys.set_identity_row(pin, st.c[i].v[pin]);
            mass_gauge = true;
        }
    }
    const SolveReport rep = solve(sys, st.c[i].v, controls);
    if (mass_gauge) {
        double got = 0.0;
        for (Index c = 0; c < mesh.n_cells(); ++c)
            got += st.c[i].v[c] * mesh.cell_volumes[c];
        if (std::abs(got) > 0.0) {
            const double scale = target_amount / got;
            for (double& v : st.c[i].v) v *= scale;
        }
    }
    double cmin = std::numeric_limits<double>::max(), cmax = 0.0;
    for (double v : st.c[i].v) {
        cmin = std::min(cmin, v);
        cmax = std::max(cmax, std::abs(v));
    }
    // scale includes the previous level: an iterate that collapsed towards
    // zero carries solver noise sized by where it came from, not by where
    // it landed. Steady solves are exempt: their intermediate Picard states
    // have no physical time level to be measured against.
    for (double v : st.c_old[i]) cmax = std::max(cmax, std::abs(v));
    if (scheme != TimeScheme::steady &&
        cmin < -1e-9 * std::max(cmax, 1e-300)) {
        char buf[200];
        std::snprintf(buf, sizeof buf,
                      "species '%s' undershoots to %.3e (max %.3e): "
                      "unresolved layer; refine the mesh or reduce dt",
                      sp.name.c_str(), cmin, cmax);
        throw SolverError(buf);
    }
    update_boundary_values(mesh, st.c_bcs[i], st.c[i]);
    return rep;
}

void electroneutral_closure(RegionState& st) {
    const std::size_t ns = st.species.size();
    if (ns < 2)
        throw ConfigError("electroneutral closure needs at least two species");
    const int zN = st.species[ns - 1].z;
    if (zN == 0)
        throw ConfigError("electroneutral closure: the last species ('" +
                          st.species[ns - 1].name +
                          "') must be charged to absorb the balance");
    for (Index c = 0; c < st.mesh->n_cells(); ++c) {
        double sum = 0.0;
        for (std::size_t i = 0; i + 1 < ns; ++i)
            sum += st.species[i].z * st.c[i].v[c];
        st.c[ns - 1].v[c] = -sum / zN;
    }
    update_boundary_values(*st.mesh, st.c_bcs[ns - 1], st.c[ns - 1]);
}

SolveReport solve_electroneutral_potential(RegionState& st,
                                           const SolveControls& controls) {
    const StructuredMesh& mesh = *st.mesh;
    if (st.species.empty())
        throw ConfigError("electroneutral potential needs species");
    const double fac = st.pc.F * st.pc.F / (st.pc.R * st.pc.T);
    std::vector<double> kappa(mesh.n_cells(), 0.0);
    for (std::size_t i = 0; i < st.species.size(); ++i) {
        const SpeciesDef& sp = st.species[i];
        const double w = fac * sp.z * sp.z * sp.D;
        for (Index c = 0; c < mesh.n_cells(); ++c)
            kappa[c] += w * st.c[i].v[c];
    }
    LinearSystem sys(mesh);
    add_laplacian(sys, mesh, interpolate_to_faces(mesh, kappa), st.phi_bcs);
    FaceScalar G = FaceScalar::uniform(mesh, 0.0);
    for (std::size_t i = 0; i < st.species.size(); ++i) {
        const SpeciesDef& sp = st.species[i];
        if (sp.z == 0) continue;
        compile_species_bcs(st, static_cast<int>(i));
        const FaceScalar gc = face_normal_gradient(mesh, st.c[i],
                                                   st.c_bcs[i]);
        const double w = st.pc.F * sp.z * sp.D;
        for (std::size_t f = 0; f < G.face.size(); ++f)
            G.face[f] += w * gc.face[f];
        for (std::size_t l = 0; l < G.link.size(); ++l)
            G.link[l] += w * gc.link[l];
    }
    const std::vector<double> divG = flux_divergence(mesh, G);
    for (Index c = 0; c < mesh.n_cells(); ++c) sys.add_rhs(c, divG[c]);
    const SolveReport rep = gauge_aware_solve(
        sys, st.phi.v, controls, true,
        "electroneutral potential (" + st.name + ")");
    update_boundary_values(mesh, st.phi_bcs, st.phi);
    return rep;
}

VectorField migration_velocity(const RegionState& st, int i) {
    const StructuredMesh& mesh = *st.mesh;
    const SpeciesDef& sp = st.species[i];
    VectorField v(mesh, "v_" + sp.name);
    const auto g = green_gauss_gradient(mesh, st.phi, st.phi_bcs);
    const double coef = -sp.D * sp.z * st.pc.F / (st.pc.R * st.pc.T);
    const bool fluid = st.kind == RegionKind::fluid;
    for (Index c = 0; c < mesh.n_cells(); ++c) {
        v.x.v[c] = (fluid ? st.u.x.v[c] : 0.0) + coef * g[c][0];
        v.y.v[c] = (fluid ? st.u.y.v[c] : 0.0) + coef * g[c][1];
    }
    return v;
}

std::vector<double> patch_species_flux(const RegionState& st, int patch,
                                       int i) {
    const StructuredMesh& mesh = *st.mesh;
    const Patch& pa = mesh.patches[patch];
    const SpeciesDef& sp = st.species[i];
    const FaceScalar gc = face_normal_gradient(mesh, st.c[i], st.c_bcs[i]);
    FaceScalar gphi;
    const bool drift = st.kind == RegionKind::fluid && sp.z != 0;
    if (drift) gphi = face_normal_gradient(mesh, st.phi, st.phi_bcs);
    const double mig = -sp.z * sp.D * st.pc.F / (st.pc.R * st.pc.T);
    std::vector<double> flux(pa.faces.size(), 0.0);
    for (int k = 0; k < pa.size(); ++k) {
        const Index fid = pa.faces[k];
        double adv = st.kind == RegionKind::fluid ? st.face_flux.face[fid]
                                                  : 0.0;
        if (drift) adv += mig * gphi.face[fid];
        flux[k] = -sp.D * gc.face[fid] + adv * st.c[i].bv[patch][k];
    }
    return flux;
}

OuterReport pimple_outer_loop(RegionState& st, const StepControls& controls) {
    OuterReport rep;
    const bool fluid = st.kind == RegionKind::fluid;
    const bool flow = fluid && !controls.frozen_flow;
    double prev_change = std::numeric_limits<double>::max();
    int growing = 0;
    for (int outer = 1; outer <= controls.max_outer; ++outer) {
        std::vector<std::vector<double>> snap;
        snap.push_back(st.u.x.v);
        snap.push_back(st.u.y.v);
        snap.push_back(st.p.v);
        snap.push_back(st.phi.v);
        for (const Field& f : st.c) snap.push_back(f.v);

        if (flow) {
            double mdiv = 0.0;
            const auto sreps = stokes_solve_coupled(st, controls.J, &mdiv);
            rep.log.push_back(solve_line("u_x", sreps[0]));
            rep.log.push_back(solve_line("u_y", sreps[1]));
            rep.log.push_back(solve_line("p", sreps[2]));
            rep.max_divergence = mdiv;
        }
        if (controls.electroneutral) {
            electroneutral_closure(st);
            rep.log.push_back(solve_line(
                "phi", solve_electroneutral_potential(st, controls.linear)));
        } else if (st.eps > 0.0) {
            rep.log.push_back(solve_line(
                "phi", solve_potential(st, controls.linear, 1.0)));
        }
        const std::size_t ns = st.species.size();
        const std::size_t transported = controls.electroneutral && ns > 0
                                            ? ns - 1
                                            : ns;
        for (std::size_t i = 0; i < transported; ++i)
            rep.log.push_back(solve_line(
                st.species[i].name,
                solve_species(st, static_cast<int>(i), controls.time_scheme,
                              controls.dt, controls.convection,
                              controls.linear)));
        if (controls.electroneutral) electroneutral_closure(st);

        double change = 0.0;
        std::size_t s = 0;
        change = std::max(change, rel_change(st.u.x.v, snap[s++]));
        change = std::max(change, rel_change(st.u.y.v, snap[s++]));
        change = std::max(change, rel_change(st.p.v, snap[s++]));
        change = std::max(change, rel_change(st.phi.v, snap[s++]));
        for (const Field& f : st.c)
            change = std::max(change, rel_change(f.v, snap[s++]));

        rep.outers = outer;
        rep.final_change = change;
        if (change < controls.outer_tol) {
            rep.converged = true;
            break;
        }
        if (change > prev_change) {
            if (++growing >= 5) {
                char buf[160];
                std::snprintf(buf, sizeof buf,
                              "outer iterations diverging in region '%s': "
                              "change grew to %.3e over 5 iterations",
                              st.name.c_str(), change);
                throw SolverError(buf);
            }
        } else {
            growing = 0;
        }
        prev_change = change;
    }
    return rep;
}

namespace {

/// Installs the current interface conditions of one coupling, both sides.
void install_interface(std::vector<RegionState>& regions,
                       const RegionInterface& link) {
    RegionState& ra = regions[link.region_a];
    RegionState& rb = regions[link.region_b];
    const Patch& pa = ra.mesh->patches[link.patch_a];
    const Patch& pb = rb.mesh->patches[link.patch_b];
    if (pa.size() != pb.size())
        throw ConfigError("interface between '" + ra.name + "' and '" +
                          rb.name + "': patch sizes differ");
    if (link.conductive) {
        ra.phi_coupled[link.patch_a] = 1;
        rb.phi_coupled[link.patch_b] = 1;
        auto& aa = ra.phi_bcs.patches[link.patch_a].alphas;
        auto& ab = rb.phi_bcs.patches[link.patch_b].alphas;
        aa.resize(pa.size());
        ab.resize(pb.size());
        for (int k = 0; k < pa.size(); ++k) {
            const Index oa = ra.mesh->faces[pa.faces[k]].owner;
            const Index ob = rb.mesh->faces[pb.faces[k]].owner;
            aa[k] = robin_alphas(
                two_sided_diffusive_coeffs(ra.eps, rb.eps, pb.B[k],
                                           rb.phi.v[ob]),
                pa.B[k], "phi interface " + pa.name);
            ab[k] = robin_alphas(
                two_sided_diffusive_coeffs(rb.eps, ra.eps, pa.B[k],
                                           ra.phi.v[oa]),
                pb.B[k], "phi interface " + pb.name);
        }
        update_boundary_values(*ra.mesh, ra.phi_bcs, ra.phi);
        update_boundary_values(*rb.mesh, rb.phi_bcs, rb.phi);
    }
    if (link.species.empty()) return;
    FaceScalar gphi_a;
    const bool fluid_a = ra.kind == RegionKind::fluid;
    if (fluid_a) gphi_a = face_normal_gradient(*ra.mesh, ra.phi, ra.phi_bcs);
    for (const SpeciesLink& sl : link.species) {
        const SpeciesDef& sa = ra.species[sl.sp_a];
        const SpeciesDef& sb = rb.species[sl.sp_b];
        ra.c_coupled[sl.sp_a][link.patch_a] = 1;
        rb.c_coupled[sl.sp_b][link.patch_b] = 1;
        auto& aa = ra.c_bcs[sl.sp_a].patches[link.patch_a].alphas;
        auto& ab = rb.c_bcs[sl.sp_b].patches[link.patch_b].alphas;
        aa.resize(pa.size());
        ab.resize(pb.size());
        const double mig_a =
            sa.z * sa.D * ra.pc.F / (ra.pc.R * ra.pc.T);
        for (int k = 0; k < pa.size(); ++k) {
            const Index fa = pa.faces[k];
            const Index oa = ra.mesh->faces[fa].owner;
            const Index ob = rb.mesh->faces[pb.faces[k]].owner;
            const double area = ra.mesh->faces[fa].area;
            const double u_n =
                fluid_a ? ra.face_flux.face[fa] / area : 0.0;
            const double drift =
                (fluid_a && sa.z != 0) ? mig_a * gphi_a.face[fa] / area : 0.0;
            const double cfa = ra.c[sl.sp_a].bv[link.patch_a][k];
            const double cfb = rb.c[sl.sp_b].bv[link.patch_b][k];
            if (sl.restricted) {
                const RateEval rate{sl.k_f * cfb - sl.k_r * cfa, sl.k_f,
                                    -sl.k_r};
                aa[k] = robin_alphas(
                    reactive_restricted_fluid(sa.D, sb.D, pb.B[k],
                                              rb.c[sl.sp_b].v[ob], cfb, cfa,
                                              u_n, drift, rate),
                    pa.B[k], sa.name + " interface " + pa.name);
                ab[k] = robin_alphas(
                    reactive_restricted_solid(sb.D, sa.D, pa.B[k],
                                              ra.c[sl.sp_a].v[oa], cfb, cfa,
                                              u_n, drift, rate),
                    pb.B[k], sb.name + " interface " + pb.name);
            } else {
                InterfaceFaceState fsa;
                fsa.c_own_face = cfa;
                fsa.c_other_face = cfb;
                fsa.c_other_cell = rb.c[sl.sp_b].v[ob];
                fsa.B_other = pb.B[k];
                fsa.u_dot_nprime = u_n;
                fsa.drift = drift;
                InterfaceFaceState fsb;
                fsb.c_own_face = cfb;
                fsb.c_other_face = cfa;
                fsb.c_other_cell = ra.c[sl.sp_a].v[oa];
                fsb.B_other = pa.B[k];
                fsb.u_dot_nprime = u_n;
                fsb.drift = drift;
                aa[k] = robin_alphas(
                    reactive_unrestricted(sa.D, sb.D, fsa, 0.0, 0.0),
                    pa.B[k], sa.name + " interface " + pa.name);
                ab[k] = robin_alphas(
                    reactive_unrestricted(sb.D, sa.D, fsb, 0.0, 0.0),
                    pb.B[k], sb.name + " interface " + pb.name);
            }
        }
        update_boundary_values(*ra.mesh, ra.c_bcs[sl.sp_a], ra.c[sl.sp_a]);
        update_boundary_values(*rb.mesh, rb.c_bcs[sl.sp_b], rb.c[sl.sp_b]);
    }
}

/// Flattened interface face values used for the stagnation test.
std::vector<double> interface_values(const std::vector<RegionState>& regions,
                                     const std::vector<RegionInterface>& links) {
    std::vector<double> vals;
    for (const RegionInterface& link : links) {
        const RegionState& ra = regions[link.region_a];
        const RegionState& rb = regions[link.region_b];
        if (link.conductive) {
            for (double v : ra.phi.bv[link.patch_a]) vals.push_back(v);
            for (double v : rb.phi.bv[link.patch_b]) vals.push_back(v);
        }
        for (const SpeciesLink& sl : link.species) {
            for (double v : ra.c[sl.sp_a].bv[link.patch_a]) vals.push_back(v);
            for (double v : rb.c[sl.sp_b].bv[link.patch_b]) vals.push_back(v);
        }
    }
    return vals;
}

} // namespace

namespace {

/// True when every outer boundary of species i is closed (zero total flux
/// or periodic), so the interface is its only exchange path.
bool species_closed_outside(const RegionState& st, int i, int skip_patch) {
    const StructuredMesh& mesh = *st.mesh;
    for (std::size_t p = 0; p < mesh.patches.size(); ++p) {
        if (static_cast<int>(p) == skip_patch) continue;
        if (mesh.patches[p].kind == PatchKind::periodic) continue;
        if (st.c_coupled[i][p]) continue;
        const PatchBC& bc = st.c_bc[i][p];
        if (bc.kind != BCKind::flux || bc.value != 0.0) return false;
    }
    return true;
}

} // namespace

MultiRegionReport multi_region_step(std::vector<RegionState>& regions,
                                    const std::vector<RegionInterface>& links,
                                    const StepControls& controls,
                                    int max_sweeps, double sweep_tol) {
    MultiRegionReport rep;

    // A steady pair of linked species with closed outer boundaries fixes
    // the profile shape but not its amplitude: the coupled operator and
    // interface conditions are homogeneous, so the solutions form a ray.
    // Each subdomain solve forgets the amplitude (it only sees the frozen
    // partner's interface values), hence the combined molar content is
    // restored after every sweep from the pre-step fields.
    struct MassPin {
        std::size_t link, sl;
        double target;
    };
    std::vector<MassPin> pins;
    if (controls.time_scheme == TimeScheme::steady) {
        for (std::size_t l = 0; l < links.size(); ++l)
            for (std::size_t s = 0; s < links[l].species.size(); ++s) {
                const SpeciesLink& sl = links[l].species[s];
                const RegionState& ra = regions[links[l].region_a];
                const RegionState& rb = regions[links[l].region_b];
                if (!species_closed_outside(ra, sl.sp_a, links[l].patch_a) ||
                    !species_closed_outside(rb, sl.sp_b, links[l].patch_b))
                    continue;
                double t0 = 0.0;
                for (Index c = 0; c < ra.mesh->n_cells(); ++c)
                    t0 += ra.species[sl.sp_a].molar_mass *
                          ra.c_old[sl.sp_a][c] * ra.mesh->cell_volumes[c];
                for (Index c = 0; c < rb.mesh->n_cells(); ++c)
                    t0 += rb.species[sl.sp_b].molar_mass *
                          rb.c_old[sl.sp_b][c] * rb.mesh->cell_volumes[c];
                pins.push_back({l, s, t0});
            }
    }
    auto renormalise = [&] {
        for (const MassPin& pin : pins) {
            const RegionInterface& link = links[pin.link];
            const SpeciesLink& sl = link.species[pin.sl];
            RegionState& ra = regions[link.region_a];
            RegionState& rb = regions[link.region_b];
            const double t = ra.species[sl.sp_a].molar_mass *
                                 total_moles(ra, sl.sp_a) +
                             rb.species[sl.sp_b].molar_mass *
                                 total_moles(rb, sl.sp_b);
            if (t == 0.0) continue;
            const double f = pin.target / t;
            for (double& v : ra.c[sl.sp_a].v) v *= f;
            for (double& v : rb.c[sl.sp_b].v) v *= f;
            update_boundary_values(*ra.mesh, ra.c_bcs[sl.sp_a], ra.c[sl.sp_a]);
            update_boundary_values(*rb.mesh, rb.c_bcs[sl.sp_b], rb.c[sl.sp_b]);
        }
    };

    for (int sweep = 1; sweep <= max_sweeps; ++sweep) {
        const std::vector<double> before = interface_values(regions, links);
        for (const RegionInterface& link : links)
            install_interface(regions, link);
        rep.region_reports.clear();
        for (RegionState& st : regions)
            if (st.kind == RegionKind::fluid)
                rep.region_reports.push_back(pimple_outer_loop(st, controls));
        // Gauss-Seidel: the solid pass must see the fluid fields it is being
        // coupled to as they are now, not as they were at the sweep top,
        // or a steady sweep sloshes the exchanged content back and forth
        for (const RegionInterface& link : links)
            install_interface(regions, link);
        for (RegionState& st : regions)
            if (st.kind == RegionKind::solid)
                rep.region_reports.push_back(pimple_outer_loop(st, controls));
        renormalise();
        const std::vector<double> after = interface_values(regions, links);
        rep.sweeps = sweep;
        rep.final_change = rel_change(after, before);
        if (rep.final_change < sweep_tol) {
            rep.converged = true;
            break;
        }
    }
    for (RegionState& st : regions) advance_history(st);
    return rep;
}

} // namespace pnp
