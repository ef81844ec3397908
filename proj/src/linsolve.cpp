#include "pnp/linsolve.hpp"

#include <cmath>
#include <numeric>

#include "pnp/errors.hpp"

namespace pnp {

namespace {

double norm2(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

std::vector<double> jacobi_weights(const LinearSystem& M, Preconditioner pc) {
    std::vector<double> w(M.rows(), 1.0);
    if (pc == Preconditioner::jacobi)
        for (Index r = 0; r < M.rows(); ++r) {
            const double d = M.diag(r);
            w[r] = (d != 0.0) ? 1.0 / d : 1.0;
        }
    return w;
}

} // namespace

SolveReport solve(const LinearSystem& M, std::vector<double>& x,
                  const SolveControls& c) {
    const Index n = M.rows();
    if (static_cast<Index>(x.size()) != n)
        throw SolverError("solve: initial guess size mismatch");

    SolveReport rep;
    std::vector<double> r = M.residual(x);
    rep.initial_residual = norm2(r);
    const double target = std::max(c.abs_tol, c.rel_tol * rep.initial_residual);
    if (rep.initial_residual <= target) {
        rep.final_residual = rep.initial_residual;
        rep.converged = true;
        return rep;
    }

    // Stagnating or diverging runs must not hand back an iterate worse than
    // the one they started from, so the best iterate seen is kept aside.
    std::vector<double> x_best = x;
    double best_norm = rep.initial_residual;
    auto note = [&](double rn) {
        if (rn < best_norm) {
            best_norm = rn;
            x_best = x;
        }
    };

    const auto w = jacobi_weights(M, c.preconditioner);
    auto precond = [&](const std::vector<double>& v) {
        std::vector<double> z(v.size());
        for (Index i = 0; i < n; ++i) z[i] = w[i] * v[i];
        return z;
    };

    if (c.method == KrylovMethod::cg) {
        std::vector<double> z = precond(r), p = z, Ap(n);
        double rz = dot(r, z);
        for (int it = 1; it <= c.max_iters; ++it) {
            M.matvec(p, Ap);
            const double pAp = dot(p, Ap);
            if (pAp == 0.0)
                throw SolverError("cg: breakdown (p·Ap = 0) at iteration " +
                                  std::to_string(it));
            const double alpha = rz / pAp;
            for (Index i = 0; i < n; ++i) {
                x[i] += alpha * p[i];
                r[i] -= alpha * Ap[i];
            }
            rep.iterations = it;
            const double rn = norm2(r);
            note(rn);
            if (rn <= target) break;
            z = precond(r);
            const double rz_new = dot(r, z);
            const double beta = rz_new / rz;
            rz = rz_new;
            for (Index i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
        }
    } else {
        // preconditioned BiCGStab; serial (Lanczos) breakdowns restart the
        // recurrence from the current residual
        std::vector<double> r0 = r, p(n, 0.0), v(n, 0.0), ph(n), sh(n), t(n), s(n);
        double rho = 1.0, alpha = 1.0, omega = 1.0;
        auto restart = [&] {
            r0 = r;
            std::fill(p.begin(), p.end(), 0.0);
            std::fill(v.begin(), v.end(), 0.0);
            rho = alpha = omega = 1.0;
        };
        for (int it = 1; it <= c.max_iters; ++it) {
            double rho_new = dot(r0, r);
            if (rho_new == 0.0) {
                if (norm2(r) <= target) break;
                restart();
                rho_new = dot(r0, r);
                if (rho_new == 0.0) break; // r = 0 exactly
            }
            const double beta = (rho_new / rho) * (alpha / omega);
            rho = rho_new;
            for (Index i = 0; i < n; ++i)
                p[i] = r[i] + beta * (p[i] - omega * v[i]);
            ph = precond(p);
            M.matvec(ph, v);
            const double r0v = dot(r0, v);
            if (r0v == 0.0)
                throw SolverError("bicgstab: breakdown (r0·v = 0) at iteration " +
                                  std::to_string(it));
            alpha = rho / r0v;
            for (Index i = 0; i < n; ++i) s[i] = r[i] - alpha * v[i];
            rep.iterations = it;
            const double sn = norm2(s);
            if (sn <= target) {
                for (Index i = 0; i < n; ++i) x[i] += alpha * ph[i];
                note(sn);
                break;
            }
            sh = precond(s);
            M.matvec(sh, t);
            const double tt = dot(t, t);
            if (tt == 0.0)
                throw SolverError("bicgstab: breakdown (t·t = 0) at iteration " +
                                  std::to_string(it));
            omega = dot(t, s) / tt;
            if (omega == 0.0)
                throw SolverError("bicgstab: breakdown (omega = 0) at iteration " +
                                  std::to_string(it));
            for (Index i = 0; i < n; ++i) {
                x[i] += alpha * ph[i] + omega * sh[i];
                r[i] = s[i] - omega * t[i];
            }
            const double rn = norm2(r);
            note(rn);
            if (rn <= target) break;
        }
    }

    rep.final_residual = norm2(M.residual(x));
    if (rep.final_residual > best_norm) {
        // recurrence residuals can drift from the truth; fall back to the
        // best iterate when the final recomputation disagrees
        x = x_best;
        rep.final_residual = norm2(M.residual(x));
    }
    rep.converged = rep.final_residual <= target;
    return rep;
}

} // namespace pnp
