#include "pnp/banded.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "pnp/errors.hpp"

namespace pnp {

BandedMatrix::BandedMatrix(int n, int kl, int ku)
    : n_(n), kl_(kl), ku_(ku), ldab_(2 * kl + ku + 1),
      ab_(static_cast<std::size_t>(ldab_) * n, 0.0), ipiv_(n, 0) {}

double& BandedMatrix::at(int i, int j) {
    if (i < 0 || j < 0 || i >= n_ || j >= n_ || i - j > kl_ || j - i > ku_)
        throw SolverError("BandedMatrix: entry (" + std::to_string(i) + "," +
                          std::to_string(j) + ") outside the band");
    return ab_[kl_ + ku_ + i - j + j * ldab_];
}

double BandedMatrix::at(int i, int j) const {
    return const_cast<BandedMatrix*>(this)->at(i, j);
}

void BandedMatrix::zero() {
    std::fill(ab_.begin(), ab_.end(), 0.0);
    factored_ = false;
}

void BandedMatrix::solve(std::vector<double>& b) {
    if (static_cast<int>(b.size()) != n_)
        throw SolverError("BandedMatrix::solve: rhs size mismatch");
    const int kv = kl_ + ku_; // fill-in extended upper bandwidth
    if (!factored_) {
        for (int k = 0; k < n_; ++k) {
            const int lm = std::min(kl_, n_ - 1 - k);
            // pivot search within column k
            int p = k;
            double pmax = std::abs(raw(kv, k));
            for (int i = 1; i <= lm; ++i) {
                const double v = std::abs(raw(kv + i, k));
                if (v > pmax) {
                    pmax = v;
                    p = k + i;
                }
            }
            ipiv_[k] = p;
            if (pmax == 0.0)
                throw SolverError("BandedMatrix: singular at column " +
                                  std::to_string(k));
            const int jmax = std::min(n_ - 1, k + kv);
            if (p != k)
                for (int j = k; j <= jmax; ++j)
                    std::swap(raw(kv + k - j, j), raw(kv + p - j, j));
            const double piv = raw(kv, k);
            for (int i = 1; i <= lm; ++i) {
                const double l = raw(kv + i, k) / piv;
                raw(kv + i, k) = l;
                for (int j = k + 1; j <= jmax; ++j)
                    raw(kv + (k + i) - j, j) -= l * raw(kv + k - j, j);
            }
        }
        factored_ = true;
    }
    // forward substitution with row swaps
    for (int k = 0; k < n_; ++k) {
        if (ipiv_[k] != k) std::swap(b[k], b[ipiv_[k]]);
        const int lm = std::min(kl_, n_ - 1 - k);
        for (int i = 1; i <= lm; ++i) b[k + i] -= raw(kv + i, k) * b[k];
    }
    // back substitution
    for (int k = n_ - 1; k >= 0; --k) {
        const int jmax = std::min(n_ - 1, k + kv);
        double s = b[k];
        for (int j = k + 1; j <= jmax; ++j) s -= raw(kv + k - j, j) * b[j];
        b[k] = s / raw(kv, k);
    }
}

std::vector<double> fd_weights(double x0, const std::vector<double>& x, int m) {
    // Fornberg (1988) recursive algorithm
    const int n = static_cast<int>(x.size());
    std::vector<std::vector<double>> c(
        n, std::vector<double>(m + 1, 0.0));
    double c1 = 1.0;
    double c4 = x[0] - x0;
    c[0][0] = 1.0;
    for (int i = 1; i < n; ++i) {
        const int mn = std::min(i, m);
        double c2 = 1.0;
        const double c5 = c4;
        c4 = x[i] - x0;
        for (int j = 0; j < i; ++j) {
            const double c3 = x[i] - x[j];
            c2 *= c3;
            if (j == i - 1) {
                for (int k = mn; k >= 1; --k)
                    c[i][k] = c1 * (k * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for (int k = mn; k >= 1; --k)
                c[j][k] = (c4 * c[j][k] - k * c[j][k - 1]) / c3;
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    std::vector<double> w(n);
    for (int i = 0; i < n; ++i) w[i] = c[i][m];
    return w;
}

} // namespace pnp
