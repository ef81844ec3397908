#pragma once

#include <string>
#include <vector>

#include "pnp/sparse.hpp"

namespace pnp {

enum class KrylovMethod { cg, bicgstab };
enum class Preconditioner { none, jacobi };

struct SolveControls {
    KrylovMethod method = KrylovMethod::bicgstab;
    Preconditioner preconditioner = Preconditioner::jacobi;
    double rel_tol = 1e-9;
    double abs_tol = 1e-14;
    int max_iters = 2000;
};

struct SolveReport {
    double initial_residual = 0.0;
    double final_residual = 0.0; ///< unpreconditioned 2-norm, recomputed
    int iterations = 0;
    bool converged = false;
};

/// Solves system in place starting from x. Residual contract:
/// ‖b − Mx‖₂ ≤ max(abs_tol, rel_tol·‖b − Mx₀‖₂) unless max_iters is hit
/// (reported, not fatal). Krylov breakdown raises SolverError.
SolveReport solve(const LinearSystem& system, std::vector<double>& x,
                  const SolveControls& controls);

} // namespace pnp
