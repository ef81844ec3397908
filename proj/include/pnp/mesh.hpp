#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace pnp {

using Index = std::int32_t;

enum class PatchKind { wall, inlet, outlet, periodic, interface_ };

struct Face {
    Index owner = -1;
    Index neighbour = -1;          ///< -1 for boundary faces
    double area = 0.0;             ///< |S_f|
    std::array<double, 2> normal{};///< unit, owner -> neighbour (or outward)
    std::array<double, 2> centre{};
    double dist = 0.0;             ///< centre-to-centre distance (internal faces)
};

struct Patch {
    std::string name;
    PatchKind kind = PatchKind::wall;
    std::vector<Index> faces;      ///< face ids into StructuredMesh::faces
    std::vector<double> B;         ///< inverse cell-centre-to-face distance [1/m]
    int partner_patch = -1;        ///< periodic partner patch id (this mesh)
    std::string partner_region;    ///< interface: name of the region across
    int size() const { return static_cast<int>(faces.size()); }
};

/// Pair of cells coupled through a periodic boundary. `face_a`/`face_b` are
/// the two matched boundary faces; assembly treats the link like an internal
/// face of area `area` and centre distance `dist`.
struct PeriodicLink {
    Index face_a = -1, face_b = -1;
    Index cell_a = -1, cell_b = -1;
    double area = 0.0;
    double dist = 0.0;
    std::array<double, 2> normal{}; ///< unit, a -> b (outward of a's side)
};

struct RandomFieldSpec {
    std::uint64_t seed = 0;
    double correlation_length = 0.0; ///< Gaussian kernel width [m]
    double threshold = 0.0;          ///< quantile in [0,1]; fraction of solid cells
    bool solid_below = true;         ///< solid where field below the quantile
};

/// Uniform Cartesian cell-centred mesh (1D meshes have ny == 1 or nx == 1).
/// Region meshes extracted from a labelled parent keep `global_cells` so
/// fields can be scattered back for output.
struct StructuredMesh {
    int nx = 0, ny = 0;
    double dx = 0.0, dy = 0.0;
    double Lx = 0.0, Ly = 0.0;
    std::vector<std::array<double, 2>> cell_centres;
    std::vector<double> cell_volumes;
    std::vector<Face> faces;
    Index n_internal = 0;            ///< faces [0, n_internal) are internal
    std::vector<int> region_label;   ///< per cell; 0 = default region
    std::vector<Patch> patches;
    std::vector<PeriodicLink> periodic_links;
    std::vector<Index> global_cells; ///< empty for a parent mesh

    Index n_cells() const { return static_cast<Index>(cell_centres.size()); }
    const Patch* find_patch(const std::string& name) const;
    int patch_id(const std::string& name) const;
};

/// Per-side boundary kinds for build_rectangle_mesh, in the order
/// left, right, bottom, top. Opposite sides marked periodic are paired.
struct SideKinds {
    PatchKind left = PatchKind::wall;
    PatchKind right = PatchKind::wall;
    PatchKind bottom = PatchKind::wall;
    PatchKind top = PatchKind::wall;
};

StructuredMesh build_rectangle_mesh(int nx, int ny, double Lx, double Ly,
                                    const SideKinds& kinds = {});

/// Matches two opposite-side patches face by face and records the links.
/// Returns the face map a -> b (positional). Called automatically by
/// build_rectangle_mesh for sides marked periodic.
std::vector<Index> pair_periodic(StructuredMesh& mesh, const std::string& a,
                                 const std::string& b);

/// Labels cells solid/fluid from a smoothed Gaussian random field
/// thresholded at the empirical quantile. Solid gets label 1, fluid 0.
void generate_random_porous(StructuredMesh& mesh, const RandomFieldSpec& spec);

/// Fluid fraction of a labelled mesh.
double porosity(const StructuredMesh& mesh);

/// Assigns `label` to every cell whose centre lies inside the box.
void label_box(StructuredMesh& mesh, int label, double xmin, double xmax,
               double ymin, double ymax);

/// Extracts the sub-mesh of all cells with `label`. Internal faces (and
/// periodic links) crossing to another label become boundary faces collected
/// in an interface patch named "interface". Matched ordering: face k of this
/// mesh's interface patch is geometrically coincident with face k of the
/// complementary region's interface patch.
StructuredMesh extract_region(const StructuredMesh& mesh, int label,
                              const std::string& other_region_name = "");

} // namespace pnp
