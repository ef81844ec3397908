#pragma once

#include <vector>

namespace pnp {

/// General banded matrix with LU factorisation and partial pivoting
/// (LAPACK gbtrf-style storage with kl extra superdiagonals for fill-in).
class BandedMatrix {
public:
    BandedMatrix(int n, int kl, int ku);

    int size() const { return n_; }

    /// Entry access; (i, j) must satisfy |i - j| within the band.
    double& at(int i, int j);
    double at(int i, int j) const;
    void add(int i, int j, double v) { at(i, j) += v; }
    void zero();

    /// Factorises in place and solves; throws SolverError on singularity.
    void solve(std::vector<double>& b);

private:
    int n_, kl_, ku_, ldab_;
    bool factored_ = false;
    std::vector<double> ab_;   ///< column-major, ldab x n
    std::vector<int> ipiv_;
    double& raw(int band_row, int col) { return ab_[band_row + col * ldab_]; }
};

/// Fornberg finite-difference weights: coefficients w such that
/// f^(m)(x0) ~ sum_k w[k] f(x[k]) for the given nodes, exact for
/// polynomials of degree len(x)-1.
std::vector<double> fd_weights(double x0, const std::vector<double>& x, int m);

} // namespace pnp
