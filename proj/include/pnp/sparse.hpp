#pragma once

#include <functional>
#include <span>
#include <vector>

#include "pnp/mesh.hpp"

namespace pnp {

/// Row-compressed sparse system M x = b on the cell adjacency graph of a
/// mesh (plus periodic-link couplings and the diagonal). The pattern is
/// fixed at construction; assembly only adds values, and `reset()` zeroes
/// them for reuse. Exposes the diagonal/off-diagonal split M x = A∘x − H(x)
/// used by the pressure correction.
class LinearSystem {
public:
    explicit LinearSystem(const StructuredMesh& mesh);

    Index rows() const { return n_; }

    void reset();

    /// Adds v to entry (r, c); the pair must be in the pattern.
    void add(Index r, Index c, double v);
    void add_diag(Index r, double v) { vals_[diag_pos_[r]] += v; }
    void add_rhs(Index r, double v) { rhs_[r] += v; }

    double diag(Index r) const { return vals_[diag_pos_[r]]; }

    std::vector<double>& rhs() { return rhs_; }
    const std::vector<double>& rhs() const { return rhs_; }

    /// y = M x
    void matvec(std::span<const double> x, std::span<double> y) const;

    /// H(x) = A∘x − M x  (off-diagonal action, paper's A/H decomposition;
    /// note H here excludes the rhs, which callers add as b − ...).
    void offdiag_action(std::span<const double> x, std::span<double> h) const;

    /// residual b − M x, recomputed from scratch
    std::vector<double> residual(std::span<const double> x) const;

    /// Replaces row r by x_r = value (gauge fixing for singular systems).
    void set_identity_row(Index r, double value = 0.0);

    /// Visits every stored entry as f(row, col, value); lets an assembled
    /// operator be lifted into a larger coupled system.
    void for_each_entry(
        const std::function<void(Index, Index, double)>& f) const;

    double row_sum(Index r) const;
    bool symmetric(double tol = 1e-12) const;

private:
    Index n_ = 0;
    std::vector<Index> row_ptr_, col_;
    std::vector<Index> diag_pos_;
    std::vector<double> vals_, rhs_;
    Index find(Index r, Index c) const;
};

} // namespace pnp
