#pragma once

#include <string>
#include <utility>
#include <vector>

#include "pnp/mesh.hpp"

namespace pnp {

/// Named per-cell array sized like the mesh it is written with.
using NamedCellField = std::pair<std::string, std::vector<double>>;

/// Legacy ASCII VTK (STRUCTURED_POINTS, CELL_DATA) snapshot of a uniform
/// rectangular mesh. Field sizes must match mesh.nx * mesh.ny.
void write_vtk(const std::string& path, const StructuredMesh& mesh,
               const std::vector<NamedCellField>& fields);

/// CSV with a header row; every row must match the header width.
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);

/// One sampled point: coordinate along the line followed by one value per
/// requested field.
struct LineSample {
    std::vector<std::string> header; ///< coordinate name then field names
    std::vector<std::vector<double>> rows;
};

/// Samples cell-centre values along an axis-aligned line through the parent
/// mesh: axis 'x' walks a row of cells at height y = position, axis 'y'
/// walks a column at x = position. A position outside the domain raises
/// ConfigError naming the offending coordinate.
LineSample sample_line(const StructuredMesh& mesh,
                       const std::vector<NamedCellField>& fields, char axis,
                       double position);

} // namespace pnp
