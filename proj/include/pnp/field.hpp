#pragma once

#include <string>
#include <vector>

#include "pnp/mesh.hpp"

namespace pnp {

/// Cell-centred scalar field with explicit per-patch boundary face values.
/// Boundary values are refreshed after every solve from the active boundary
/// condition, so green_gauss_gradient and flux evaluations can use them
/// without knowing the BC that produced them.
struct Field {
    std::string name;
    std::string units;
    std::vector<double> v;                  ///< per cell
    std::vector<std::vector<double>> bv;    ///< per patch, per face

    Field() = default;
    Field(const StructuredMesh& mesh, std::string name_, double init = 0.0,
          std::string units_ = "")
        : name(std::move(name_)), units(std::move(units_)),
          v(mesh.n_cells(), init) {
        bv.resize(mesh.patches.size());
        for (std::size_t p = 0; p < mesh.patches.size(); ++p)
            bv[p].assign(mesh.patches[p].faces.size(), init);
    }

    double& operator[](Index c) { return v[c]; }
    double operator[](Index c) const { return v[c]; }
    std::size_t size() const { return v.size(); }
};

/// Simple 2-component vector field stored as two scalar Fields.
struct VectorField {
    Field x, y;
    VectorField() = default;
    VectorField(const StructuredMesh& mesh, const std::string& name)
        : x(mesh, name + "_x"), y(mesh, name + "_y") {}
};

} // namespace pnp
