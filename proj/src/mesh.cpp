#include "pnp/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

#include "pnp/errors.hpp"

namespace pnp {

const Patch* StructuredMesh::find_patch(const std::string& name) const {
    for (const auto& p : patches)
        if (p.name == name) return &p;
    return nullptr;
}

int StructuredMesh::patch_id(const std::string& name) const {
    for (std::size_t i = 0; i < patches.size(); ++i)
        if (patches[i].name == name) return static_cast<int>(i);
    return -1;
}

StructuredMesh build_rectangle_mesh(int nx, int ny, double Lx, double Ly,
                                    const SideKinds& kinds) {
    if (nx < 1 || ny < 1)
        throw ConfigError("build_rectangle_mesh: cell counts must be >= 1");
    if (!(Lx > 0.0) || !(Ly > 0.0))
        throw ConfigError("build_rectangle_mesh: extents must be positive");

    StructuredMesh m;
    m.nx = nx;
    m.ny = ny;
    m.Lx = Lx;
    m.Ly = Ly;
    m.dx = Lx / nx;
    m.dy = Ly / ny;

    const Index n = static_cast<Index>(nx) * ny;
    m.cell_centres.resize(n);
    m.cell_volumes.assign(n, m.dx * m.dy);
    m.region_label.assign(n, 0);
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i)
            m.cell_centres[i + static_cast<Index>(nx) * j] = {(i + 0.5) * m.dx,
                                                              (j + 0.5) * m.dy};

    auto cid = [nx](int i, int j) { return static_cast<Index>(i + nx * j); };

    // internal faces, x-normal then y-normal
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i + 1 < nx; ++i) {
            Face f;
            f.owner = cid(i, j);
            f.neighbour = cid(i + 1, j);
            f.area = m.dy;
            f.normal = {1.0, 0.0};
            f.centre = {(i + 1) * m.dx, (j + 0.5) * m.dy};
            f.dist = m.dx;
            m.faces.push_back(f);
        }
    for (int j = 0; j + 1 < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            Face f;
            f.owner = cid(i, j);
            f.neighbour = cid(i, j + 1);
            f.area = m.dx;
            f.normal = {0.0, 1.0};
            f.centre = {(i + 0.5) * m.dx, (j + 1) * m.dy};
            f.dist = m.dy;
            m.faces.push_back(f);
        }
    m.n_internal = static_cast<Index>(m.faces.size());

    auto add_side = [&](const std::string& name, PatchKind kind,
                        auto face_of) {
        Patch p;
        p.name = name;
        p.kind = kind;
        const int count = (name == "left" || name == "right") ? ny : nx;
        for (int k = 0; k < count; ++k) {
            Face f = face_of(k);
            p.faces.push_back(static_cast<Index>(m.faces.size()));
            p.B.push_back((name == "left" || name == "right") ? 2.0 / m.dx
                                                              : 2.0 / m.dy);
            m.faces.push_back(f);
        }
        m.patches.push_back(std::move(p));
    };

    add_side("left", kinds.left, [&](int j) {
        Face f;
        f.owner = cid(0, j);
        f.area = m.dy;
        f.normal = {-1.0, 0.0};
        f.centre = {0.0, (j + 0.5) * m.dy};
        return f;
    });
    add_side("right", kinds.right, [&](int j) {
        Face f;
        f.owner = cid(nx - 1, j);
        f.area = m.dy;
        f.normal = {1.0, 0.0};
        f.centre = {Lx, (j + 0.5) * m.dy};
        return f;
    });
    add_side("bottom", kinds.bottom, [&](int i) {
        Face f;
        f.owner = cid(i, 0);
        f.area = m.dx;
        f.normal = {0.0, -1.0};
        f.centre = {(i + 0.5) * m.dx, 0.0};
        return f;
    });
    add_side("top", kinds.top, [&](int i) {
        Face f;
        f.owner = cid(i, ny - 1);
        f.area = m.dx;
        f.normal = {0.0, 1.0};
        f.centre = {(i + 0.5) * m.dx, Ly};
        return f;
    });

    const bool px = kinds.left == PatchKind::periodic;
    const bool qx = kinds.right == PatchKind::periodic;
    if (px != qx)
        throw ConfigError("periodic sides must come in opposite pairs (x)");
    const bool py = kinds.bottom == PatchKind::periodic;
    const bool qy = kinds.top == PatchKind::periodic;
    if (py != qy)
        throw ConfigError("periodic sides must come in opposite pairs (y)");
    if (px) pair_periodic(m, "left", "right");
    if (py) pair_periodic(m, "bottom", "top");
    return m;
}

std::vector<Index> pair_periodic(StructuredMesh& mesh, const std::string& a,
                                 const std::string& b) {
    const int ia = mesh.patch_id(a);
    const int ib = mesh.patch_id(b);
    if (ia < 0 || ib < 0)
        throw ConfigError("pair_periodic: unknown patch '" + (ia < 0 ? a : b) + "'");
    Patch& pa = mesh.patches[ia];
    Patch& pb = mesh.patches[ib];
    if (pa.size() != pb.size())
        throw ConfigError("pair_periodic: face count mismatch between '" + a +
                          "' (" + std::to_string(pa.size()) + ") and '" + b +
                          "' (" + std::to_string(pb.size()) + ")");
    pa.kind = pb.kind = PatchKind::periodic;
    pa.partner_patch = ib;
    pb.partner_patch = ia;

    std::vector<Index> map(pa.faces.size());
    for (int k = 0; k < pa.size(); ++k) {
        const Face& fa = mesh.faces[pa.faces[k]];
        const Face& fb = mesh.faces[pb.faces[k]];
        // transverse coordinate must match by construction
        const double ta = std::abs(fa.normal[0]) > 0.5 ? fa.centre[1] : fa.centre[0];
        const double tb = std::abs(fb.normal[0]) > 0.5 ? fb.centre[1] : fb.centre[0];
        const double tol = 1e-12 * std::max(mesh.dx, mesh.dy);
        if (std::abs(ta - tb) > tol)
            throw ConfigError("pair_periodic: face ordering mismatch");
        map[k] = static_cast<Index>(k);

        PeriodicLink link;
        link.face_a = pa.faces[k];
        link.face_b = pb.faces[k];
        link.cell_a = fa.owner;
        link.cell_b = fb.owner;
        link.area = fa.area;
        link.dist = 1.0 / pa.B[k] + 1.0 / pb.B[k];
        link.normal = fa.normal;
        mesh.periodic_links.push_back(link);
    }
    return map;
}

namespace {

/// Separable Gaussian blur with wrap-around, so thresholded geometry is
/// compatible with periodic outer boundaries.
void gaussian_blur_periodic(std::vector<double>& v, int nx, int ny,
                            double sigma_x, double sigma_y) {
    auto blur_axis = [](std::vector<double>& f, int n_outer, int n_inner,
                        int stride_inner, int stride_outer, double sigma) {
        if (sigma <= 0.0) return;
        const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
        std::vector<double> kernel(2 * radius + 1);
        double sum = 0.0;
        for (int k = -radius; k <= radius; ++k) {
            kernel[k + radius] = std::exp(-0.5 * (k / sigma) * (k / sigma));
            sum += kernel[k + radius];
        }
        for (auto& w : kernel) w /= sum;
        std::vector<double> line(n_inner);
        for (int o = 0; o < n_outer; ++o) {
            for (int i = 0; i < n_inner; ++i)
                line[i] = f[o * stride_outer + i * stride_inner];
            for (int i = 0; i < n_inner; ++i) {
                double acc = 0.0;
                for (int k = -radius; k <= radius; ++k) {
                    int idx = (i + k) % n_inner;
                    if (idx < 0) idx += n_inner;
                    acc += kernel[k + radius] * line[idx];
                }
                f[o * stride_outer + i * stride_inner] = acc;
            }
        }
    };
    blur_axis(v, ny, nx, 1, nx, sigma_x);
    blur_axis(v, nx, ny, nx, 1, sigma_y);
}

} // namespace

void generate_random_porous(StructuredMesh& mesh, const RandomFieldSpec& spec) {
    if (mesh.nx < 2 || mesh.ny < 2)
        throw ConfigError("generate_random_porous: needs a 2D mesh");
    if (spec.threshold < 0.0 || spec.threshold >= 1.0)
        throw ConfigError("generate_random_porous: threshold must be in [0,1)");

    const Index n = mesh.n_cells();
    std::fill(mesh.region_label.begin(), mesh.region_label.end(), 0);
    if (spec.threshold == 0.0) return; // all fluid

    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<double> field(n);
    for (auto& v : field) v = gauss(rng);

    gaussian_blur_periodic(field, mesh.nx, mesh.ny,
                           spec.correlation_length / mesh.dx,
                           spec.correlation_length / mesh.dy);

    if (!spec.solid_below)
        for (auto& v : field) v = -v;

    auto [lo, hi] = std::minmax_element(field.begin(), field.end());
    if (!(*hi - *lo > 0.0))
        throw MeshError("generate_random_porous: degenerate (zero variance) field");

    std::vector<double> sorted(field);
    std::sort(sorted.begin(), sorted.end());
    const auto k = static_cast<std::size_t>(spec.threshold * n);
    const double q = sorted[std::min<std::size_t>(k, n - 1)];
    for (Index c = 0; c < n; ++c)
        if (field[c] < q) mesh.region_label[c] = 1;
}

double porosity(const StructuredMesh& mesh) {
    if (mesh.region_label.empty()) return 1.0;
    const auto fluid = std::count(mesh.region_label.begin(),
                                  mesh.region_label.end(), 0);
    return static_cast<double>(fluid) / mesh.region_label.size();
}

void label_box(StructuredMesh& mesh, int label, double xmin, double xmax,
               double ymin, double ymax) {
    for (Index c = 0; c < mesh.n_cells(); ++c) {
        const auto& x = mesh.cell_centres[c];
        if (x[0] >= xmin && x[0] <= xmax && x[1] >= ymin && x[1] <= ymax)
            mesh.region_label[c] = label;
    }
}

StructuredMesh extract_region(const StructuredMesh& mesh, int label,
                              const std::string& other_region_name) {
    StructuredMesh r;
    r.nx = mesh.nx;
    r.ny = mesh.ny;
    r.dx = mesh.dx;
    r.dy = mesh.dy;
    r.Lx = mesh.Lx;
    r.Ly = mesh.Ly;

    std::vector<Index> local(mesh.n_cells(), -1);
    for (Index c = 0; c < mesh.n_cells(); ++c) {
        if (mesh.region_label[c] == label) {
            local[c] = static_cast<Index>(r.cell_centres.size());
            r.cell_centres.push_back(mesh.cell_centres[c]);
            r.cell_volumes.push_back(mesh.cell_volumes[c]);
            r.global_cells.push_back(c);
        }
    }
    if (r.cell_centres.empty())
        throw MeshError("extract_region: no cells with label " +
                        std::to_string(label));
    r.region_label.assign(r.n_cells(), label);

    Patch iface;
    iface.name = "interface";
    iface.kind = PatchKind::interface_;
    iface.partner_region = other_region_name;

    std::vector<Index> face_map(mesh.faces.size(), -1);

    // internal faces: keep, or split into interface boundary faces
    for (Index fi = 0; fi < mesh.n_internal; ++fi) {
        const Face& f = mesh.faces[fi];
        const bool own_in = local[f.owner] >= 0;
        const bool nei_in = local[f.neighbour] >= 0;
        if (own_in && nei_in) {
            Face g = f;
            g.owner = local[f.owner];
            g.neighbour = local[f.neighbour];
            face_map[fi] = static_cast<Index>(r.faces.size());
            r.faces.push_back(g);
        } else if (own_in || nei_in) {
            Face g = f;
            g.neighbour = -1;
            if (own_in) {
                g.owner = local[f.owner];
            } else {
                g.owner = local[f.neighbour];
                g.normal = {-f.normal[0], -f.normal[1]};
            }
            g.dist = 0.0;
            face_map[fi] = static_cast<Index>(r.faces.size());
            r.faces.push_back(g);
            iface.faces.push_back(face_map[fi]);
            iface.B.push_back(2.0 / (std::abs(g.normal[0]) > 0.5 ? r.dx : r.dy));
        }
    }
    r.n_internal = static_cast<Index>(r.faces.size());
    // boundary faces created above for the interface precede n_internal;
    // rebuild ordering: move interface faces after internal ones
    {
        std::vector<Face> internal_faces, boundary_faces;
        std::vector<Index> order(r.faces.size());
        std::vector<bool> is_iface(r.faces.size(), false);
        for (Index id : iface.faces) is_iface[id] = true;
        for (Index fi = 0; fi < static_cast<Index>(r.faces.size()); ++fi)
            (is_iface[fi] ? boundary_faces : internal_faces)
                .push_back(r.faces[fi]);
        Index ni = static_cast<Index>(internal_faces.size());
        Index ci = 0, cb = 0;
        for (Index fi = 0; fi < static_cast<Index>(r.faces.size()); ++fi)
            order[fi] = is_iface[fi] ? ni + cb++ : ci++;
        for (auto& old_new : face_map)
            if (old_new >= 0) old_new = order[old_new];
        for (auto& id : iface.faces) id = order[id];
        r.faces = std::move(internal_faces);
        r.faces.insert(r.faces.end(), boundary_faces.begin(), boundary_faces.end());
        r.n_internal = ni;
    }

    // original boundary patches, restricted to this region
    std::vector<bool> face_to_iface(mesh.faces.size(), false);
    for (const auto& link : mesh.periodic_links) {
        if ((local[link.cell_a] >= 0) != (local[link.cell_b] >= 0)) {
            face_to_iface[link.face_a] = true;
            face_to_iface[link.face_b] = true;
        }
    }
    for (const auto& p : mesh.patches) {
        Patch q;
        q.name = p.name;
        q.kind = p.kind;
        q.partner_region = p.partner_region;
        for (int k = 0; k < p.size(); ++k) {
            const Index fi = p.faces[k];
            const Face& f = mesh.faces[fi];
            if (local[f.owner] < 0 || face_to_iface[fi]) continue;
            Face g = f;
            g.owner = local[f.owner];
            face_map[fi] = static_cast<Index>(r.faces.size());
            r.faces.push_back(g);
            q.faces.push_back(face_map[fi]);
            q.B.push_back(p.B[k]);
        }
        r.patches.push_back(std::move(q));
    }

    // cross-label periodic links become interface faces on each side
    for (const auto& link : mesh.periodic_links) {
        const bool a_in = local[link.cell_a] >= 0;
        const bool b_in = local[link.cell_b] >= 0;
        if (a_in == b_in) continue;
        const Index fi = a_in ? link.face_a : link.face_b;
        const Face& f = mesh.faces[fi];
        Face g = f;
        g.owner = local[f.owner];
        face_map[fi] = static_cast<Index>(r.faces.size());
        r.faces.push_back(g);
        iface.faces.push_back(face_map[fi]);
        iface.B.push_back(2.0 / (std::abs(g.normal[0]) > 0.5 ? r.dx : r.dy));
    }

    // periodic links fully inside the region
    for (const auto& link : mesh.periodic_links) {
        if (local[link.cell_a] < 0 || local[link.cell_b] < 0) continue;
        PeriodicLink l = link;
        l.cell_a = local[link.cell_a];
        l.cell_b = local[link.cell_b];
        l.face_a = face_map[link.face_a];
        l.face_b = face_map[link.face_b];
        r.periodic_links.push_back(l);
    }

    if (!iface.faces.empty()) r.patches.push_back(std::move(iface));

    // restore periodic partner ids by name
    for (auto& p : r.patches) {
        if (p.kind != PatchKind::periodic) continue;
        const auto& orig = *mesh.find_patch(p.name);
        if (orig.partner_patch >= 0)
            p.partner_patch = r.patch_id(mesh.patches[orig.partner_patch].name);
    }
    return r;
}

} // namespace pnp
