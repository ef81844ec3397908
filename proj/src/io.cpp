#include "pnp/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "pnp/errors.hpp"

namespace pnp {
namespace {

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out)
        throw ConfigError("cannot write '" + path + "'");
    return out;
}

/// %.17g round-trips doubles exactly, keeping repeated runs byte-identical.
std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace

void write_vtk(const std::string& path, const StructuredMesh& mesh,
               const std::vector<NamedCellField>& fields) {
    const std::size_t n = static_cast<std::size_t>(mesh.nx) * mesh.ny;
    for (const auto& [name, data] : fields)
        if (data.size() != n)
            throw ConfigError("vtk field '" + name + "' has " +
                              std::to_string(data.size()) + " values, mesh has " +
                              std::to_string(n) + " cells");
    std::ofstream out = open_out(path);
    out << "# vtk DataFile Version 3.0\n";
    out << "snapshot\n";
    out << "ASCII\n";
    out << "DATASET STRUCTURED_POINTS\n";
    out << "DIMENSIONS " << mesh.nx + 1 << ' ' << mesh.ny + 1 << " 1\n";
    out << "ORIGIN 0 0 0\n";
    out << "SPACING " << num(mesh.dx) << ' ' << num(mesh.dy) << " 1\n";
    out << "CELL_DATA " << n << "\n";
    for (const auto& [name, data] : fields) {
        out << "SCALARS " << name << " double 1\n";
        out << "LOOKUP_TABLE default\n";
        for (double v : data)
            out << num(v) << "\n";
    }
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
    std::ofstream out = open_out(path);
    for (std::size_t i = 0; i < header.size(); ++i)
        out << (i ? "," : "") << header[i];
    out << "\n";
    for (const auto& row : rows) {
        if (row.size() != header.size())
            throw ConfigError("csv row width " + std::to_string(row.size()) +
                              " does not match header width " +
                              std::to_string(header.size()));
        for (std::size_t i = 0; i < row.size(); ++i)
            out << (i ? "," : "") << num(row[i]);
        out << "\n";
    }
}

LineSample sample_line(const StructuredMesh& mesh,
                       const std::vector<NamedCellField>& fields, char axis,
                       double position) {
    if (axis != 'x' && axis != 'y')
        throw ConfigError("sample axis must be 'x' or 'y'");
    const double cross_len = axis == 'x' ? mesh.Ly : mesh.Lx;
    if (position < 0.0 || position > cross_len)
        throw ConfigError("sample position " + std::to_string(position) +
                          " lies outside the domain [0, " +
                          std::to_string(cross_len) + "]");
    const double d = axis == 'x' ? mesh.dy : mesh.dx;
    int idx = static_cast<int>(std::floor(position / d));
    idx = std::min(std::max(idx, 0), (axis == 'x' ? mesh.ny : mesh.nx) - 1);

    LineSample s;
    s.header.push_back(axis == 'x' ? "x" : "y");
    for (const auto& [name, data] : fields) {
        if (data.size() != static_cast<std::size_t>(mesh.nx) * mesh.ny)
            throw ConfigError("sample field '" + name + "' size mismatch");
        s.header.push_back(name);
    }
    const int count = axis == 'x' ? mesh.nx : mesh.ny;
    for (int k = 0; k < count; ++k) {
        // parent meshes store cells row-major: cell = iy * nx + ix
        const int cell = axis == 'x' ? idx * mesh.nx + k : k * mesh.nx + idx;
        std::vector<double> row;
        row.push_back(axis == 'x' ? (k + 0.5) * mesh.dx : (k + 0.5) * mesh.dy);
        for (const auto& [name, data] : fields)
            row.push_back(data[cell]);
        s.rows.push_back(std::move(row));
    }
    return s;
}

} // namespace pnp
