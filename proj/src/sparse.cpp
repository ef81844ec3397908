#include "pnp/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "pnp/errors.hpp"

namespace pnp {

LinearSystem::LinearSystem(const StructuredMesh& mesh) {
    n_ = mesh.n_cells();
    std::vector<std::set<Index>> adj(n_);
    for (Index c = 0; c < n_; ++c) adj[c].insert(c);
    for (Index fi = 0; fi < mesh.n_internal; ++fi) {
        const Face& f = mesh.faces[fi];
        adj[f.owner].insert(f.neighbour);
        adj[f.neighbour].insert(f.owner);
    }
    for (const auto& link : mesh.periodic_links) {
        adj[link.cell_a].insert(link.cell_b);
        adj[link.cell_b].insert(link.cell_a);
    }
    row_ptr_.resize(n_ + 1, 0);
    for (Index r = 0; r < n_; ++r)
        row_ptr_[r + 1] = row_ptr_[r] + static_cast<Index>(adj[r].size());
    col_.reserve(row_ptr_[n_]);
    diag_pos_.resize(n_);
    for (Index r = 0; r < n_; ++r) {
        for (Index c : adj[r]) {
            if (c == r) diag_pos_[r] = static_cast<Index>(col_.size());
            col_.push_back(c);
        }
    }
    vals_.assign(col_.size(), 0.0);
    rhs_.assign(n_, 0.0);
}

void LinearSystem::reset() {
    std::fill(vals_.begin(), vals_.end(), 0.0);
    std::fill(rhs_.begin(), rhs_.end(), 0.0);
}

Index LinearSystem::find(Index r, Index c) const {
    const auto b = col_.begin() + row_ptr_[r];
    const auto e = col_.begin() + row_ptr_[r + 1];
    const auto it = std::lower_bound(b, e, c);
    if (it == e || *it != c)
        throw SolverError("LinearSystem: entry (" + std::to_string(r) + "," +
                          std::to_string(c) + ") outside the sparsity pattern");
    return static_cast<Index>(it - col_.begin());
}

void LinearSystem::add(Index r, Index c, double v) { vals_[find(r, c)] += v; }

void LinearSystem::matvec(std::span<const double> x, std::span<double> y) const {
    for (Index r = 0; r < n_; ++r) {
        double acc = 0.0;
        for (Index k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k)
            acc += vals_[k] * x[col_[k]];
        y[r] = acc;
    }
}

void LinearSystem::offdiag_action(std::span<const double> x,
                                  std::span<double> h) const {
    for (Index r = 0; r < n_; ++r) {
        double acc = 0.0;
        for (Index k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k)
            if (col_[k] != r) acc += vals_[k] * x[col_[k]];
        h[r] = -acc;
    }
}

void LinearSystem::set_identity_row(Index r, double value) {
    for (Index k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k)
        vals_[k] = (col_[k] == r) ? 1.0 : 0.0;
    rhs_[r] = value;
}

std::vector<double> LinearSystem::residual(std::span<const double> x) const {
    std::vector<double> r(n_);
    matvec(x, r);
    for (Index i = 0; i < n_; ++i) r[i] = rhs_[i] - r[i];
    return r;
}

void LinearSystem::for_each_entry(
    const std::function<void(Index, Index, double)>& f) const {
    for (Index r = 0; r < n_; ++r)
        for (Index k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k)
            f(r, col_[k], vals_[k]);
}

double LinearSystem::row_sum(Index r) const {
    double acc = 0.0;
    for (Index k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) acc += vals_[k];
    return acc;
}

bool LinearSystem::symmetric(double tol) const {
    double scale = 0.0;
    for (double v : vals_) scale = std::max(scale, std::abs(v));
    for (Index r = 0; r < n_; ++r)
        for (Index k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
            const Index c = col_[k];
            if (c <= r) continue;
            const auto b = col_.begin() + row_ptr_[c];
            const auto e = col_.begin() + row_ptr_[c + 1];
            const auto it = std::lower_bound(b, e, r);
            const double vt = (it != e && *it == r)
                                  ? vals_[it - col_.begin()] : 0.0;
            if (std::abs(vals_[k] - vt) > tol * std::max(1.0, scale))
                return false;
        }
    return true;
}

} // namespace pnp
