#pragma once

#include <array>
#include <vector>

#include "pnp/boundary.hpp"
#include "pnp/field.hpp"
#include "pnp/mesh.hpp"
#include "pnp/sparse.hpp"

namespace pnp {

enum class ConvectionScheme { upwind, linear };
enum class TimeScheme { steady, euler, backward2 };

/// Scalar data attached to every face: `face` is indexed like
/// StructuredMesh::faces (boundary entries included), `link` like
/// StructuredMesh::periodic_links. Used for diffusivities and face fluxes.
struct FaceScalar {
    std::vector<double> face;
    std::vector<double> link;

    static FaceScalar uniform(const StructuredMesh& mesh, double value);
};

/// Face interpolation of a cell-centred coefficient (linear or harmonic).
/// Boundary faces take the owner value.
FaceScalar interpolate_to_faces(const StructuredMesh& mesh,
                                const std::vector<double>& cell_values,
                                bool harmonic = false);

/// Adds the cell-integrated operator −∇·(γ∇x) to the system. Boundary faces
/// fold through the Robin alphas: flux γ A (a3 x_c + a4).
void add_laplacian(LinearSystem& sys, const StructuredMesh& mesh,
                   const FaceScalar& gamma, const FieldBCs& bcs,
                   double sign = 1.0);

/// Adds the cell-integrated ∇·(flux x). `flux` carries volumetric face
/// fluxes [m³/s] oriented owner→neighbour (links a→b, boundary outward).
void add_convection(LinearSystem& sys, const StructuredMesh& mesh,
                    const FaceScalar& flux, ConvectionScheme scheme,
                    const FieldBCs& bcs);

/// Adds the time derivative V ∂x/∂t. backward2 needs two history levels;
/// when `x_older` is null it falls back to euler and sets `*fell_back`.
void add_ddt(LinearSystem& sys, const StructuredMesh& mesh, TimeScheme scheme,
             double dt, const std::vector<double>& x_old,
             const std::vector<double>* x_older = nullptr,
             bool* fell_back = nullptr);

/// Adds a volumetric source: rhs += V·source_density (explicit part) and
/// diag += V·implicit_coeff (implicit part, sign as it appears on the LHS).
void add_source(LinearSystem& sys, const StructuredMesh& mesh,
                const std::vector<double>& source_density);

/// Green–Gauss cell gradient using stored boundary values and periodic link
/// jumps. Result: per cell {d/dx, d/dy}.
std::vector<std::array<double, 2>>
green_gauss_gradient(const StructuredMesh& mesh, const Field& f,
                     const FieldBCs& bcs);

/// Face-normal gradient times area, oriented like FaceScalar fluxes:
/// internal A (x_N − x_O)/d, link A (x_b + jump − x_a)/d, boundary
/// A (a3 x_c + a4).
FaceScalar face_normal_gradient(const StructuredMesh& mesh, const Field& f,
                                const FieldBCs& bcs);

/// Divergence of a face flux per cell (sum of outgoing fluxes).
std::vector<double> flux_divergence(const StructuredMesh& mesh,
                                    const FaceScalar& flux);

} // namespace pnp
