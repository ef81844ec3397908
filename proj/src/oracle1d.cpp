#include "pnp/oracle1d.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>

#include "pnp/banded.hpp"
#include "pnp/errors.hpp"

namespace pnp {

namespace {

/// 4th-order derivative stencil at node i of a uniform n-node grid:
/// centred where possible, skewed near the boundary.
struct Stencil {
    int start = 0;
    std::vector<double> w;
};

Stencil deriv_stencil(int i, int n, double h, int m) {
    const int npts = m + 4; // order-4 accuracy
    if (n < npts) throw OracleError("oracle grid too coarse");
    const int start = std::clamp(i - npts / 2, 0, n - npts);
    std::vector<double> xs(npts);
    for (int k = 0; k < npts; ++k) xs[k] = (start + k - i) * h;
    return {start, fd_weights(0.0, xs, m)};
}

double apply_stencil(const Stencil& s, const std::vector<double>& f) {
    double acc = 0.0;
    for (std::size_t k = 0; k < s.w.size(); ++k) acc += s.w[k] * f[s.start + k];
    return acc;
}

double norm_inf(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

} // namespace

double simpson_mass(const std::vector<double>& x, const std::vector<double>& f) {
    const int n = static_cast<int>(x.size());
    if (n < 3 || n % 2 == 0)
        throw OracleError("simpson_mass: need an odd node count >= 3");
    const double h = (x.back() - x.front()) / (n - 1);
    double s = f.front() + f.back();
    for (int i = 1; i < n - 1; ++i) s += f[i] * (i % 2 ? 4.0 : 2.0);
    return s * h / 3.0;
}

ChannelSolution solve_channel(const ChannelProblem& p,
                              const PhysicalConstants& pc_in) {
    PhysicalConstants pc = pc_in;
    pc.T = p.T;
    const int n = p.nodes;
    if (n < 7 || n % 2 == 0)
        throw OracleError("solve_channel: nodes must be odd and >= 7");
    const double h = p.H / (n - 1);

    ChannelSolution sol;
    sol.y.resize(n);
    for (int i = 0; i < n; ++i) sol.y[i] = i * h;

    // velocity: mu u'' = Jx with no-slip walls (decoupled, linear)
    {
        BandedMatrix A(n, 6, 6);
        std::vector<double> b(n, 0.0);
        A.at(0, 0) = 1.0;
        A.at(n - 1, n - 1) = 1.0;
        for (int i = 1; i < n - 1; ++i) {
            const auto s = deriv_stencil(i, n, h, 2);
            for (std::size_t k = 0; k < s.w.size(); ++k)
                A.add(i, s.start + static_cast<int>(k), p.mu * s.w[k]);
            b[i] = p.Jx;
        }
        A.solve(b);
        sol.u = b;
    }

    // Poisson-Boltzmann for phi with the mean-concentration gauge on C0
    const double beta = pc.F * p.z / (pc.R * pc.T);
    std::vector<double> phi(n);
    for (int i = 0; i < n; ++i)
        phi[i] = p.phi_bottom +
                 (p.phi_top - p.phi_bottom) * sol.y[i] / p.H;
    double C0 = p.c_mean;

    std::vector<Stencil> d2(n);
    for (int i = 1; i < n - 1; ++i) d2[i] = deriv_stencil(i, n, h, 2);

    auto residual = [&](const std::vector<double>& f, std::vector<double>& r) {
        r[0] = f[0] - p.phi_bottom;
        r[n - 1] = f[n - 1] - p.phi_top;
        for (int i = 1; i < n - 1; ++i)
            r[i] = p.eps * apply_stencil(d2[i], f) +
                   pc.F * p.z * C0 * std::exp(-beta * f[i]);
    };

    const double res_scale = pc.F * std::abs(p.z) * p.c_mean + 1.0;
    for (int outer = 0; outer < 200; ++outer) {
        // Newton on phi at fixed C0
        std::vector<double> res(n);
        for (int it = 0; it < p.newton.max_iters; ++it) {
            residual(phi, res);
            if (norm_inf(res) <= p.newton.tol * res_scale) break;
            BandedMatrix J(n, 6, 6);
            J.at(0, 0) = 1.0;
            J.at(n - 1, n - 1) = 1.0;
            for (int i = 1; i < n - 1; ++i) {
                const auto& s = d2[i];
                for (std::size_t k = 0; k < s.w.size(); ++k)
                    J.add(i, s.start + static_cast<int>(k), p.eps * s.w[k]);
                J.add(i, i, -beta * pc.F * p.z * C0 * std::exp(-beta * phi[i]));
            }
            std::vector<double> step(res);
            for (double& v : step) v = -v;
            J.solve(step);
            // damped update
            const double r0 = norm_inf(res);
            double lambda = 1.0;
            std::vector<double> trial(n), rt(n);
            for (int cut = 0; cut < 30; ++cut) {
                for (int i = 0; i < n; ++i) trial[i] = phi[i] + lambda * step[i];
                residual(trial, rt);
                if (norm_inf(rt) < r0 || norm_inf(rt) <= p.newton.tol * res_scale)
                    break;
                lambda *= 0.5;
            }
            phi = trial;
        }
        // gauge update: channel-average concentration equals c_mean
        std::vector<double> boltz(n);
        for (int i = 0; i < n; ++i) boltz[i] = std::exp(-beta * phi[i]);
        const double C0_new = p.c_mean * p.H / simpson_mass(sol.y, boltz);
        const double change = std::abs(C0_new - C0) / std::max(C0, 1e-300);
        C0 = C0_new;
        if (change < 1e-14) break;
        if (outer == 199)
            throw OracleError("solve_channel: gauge iteration stalled");
    }

    sol.phi = phi;
    sol.c.resize(n);
    sol.p.resize(n);
    for (int i = 0; i < n; ++i) sol.c[i] = C0 * std::exp(-beta * phi[i]);
    for (int i = 0; i < n; ++i) sol.p[i] = pc.R * pc.T * (sol.c[i] - sol.c[0]);
    return sol;
}

TwoSpeciesSolution solve_two_species(const TwoSpeciesProblem& p,
                                     const PhysicalConstants& pc_in) {
    PhysicalConstants pc = pc_in;
    pc.T = p.T;
    const int n = p.nodes;
    if (n < 7 || n % 2 == 0)
        throw OracleError("solve_two_species: nodes must be odd and >= 7");
    const double h = p.L / (n - 1);
    const int N = 3 * n;
    // unknowns per node: w1 = ln c1, w2 = ln c2, phi. The log variables keep
    // concentrations positive and flatten the exponential wall layers, so
    // Newton needs no positivity safeguard.
    auto idx = [](int i, int f) { return 3 * i + f; };

    std::vector<Stencil> d2(n);
    for (int i = 1; i < n - 1; ++i) d2[i] = deriv_stencil(i, n, h, 2);

    // half-node stencils for the conservative flux form: value and first
    // derivative at x_{j+1/2} from five nodes, 4th order
    constexpr int hw = 5;
    struct HalfStencil {
        int start = 0;
        std::vector<double> wv, wd;
    };
    std::vector<HalfStencil> half(n - 1);
    for (int j = 0; j < n - 1; ++j) {
        const int start = std::clamp(j - 2, 0, n - hw);
        std::vector<double> xs(hw);
        for (int k = 0; k < hw; ++k) xs[k] = (start + k) * h;
        half[j] = {start, fd_weights((j + 0.5) * h, xs, 0),
                   fd_weights((j + 0.5) * h, xs, 1)};
    }

    TwoSpeciesSolution sol;
    sol.x.resize(n);
    for (int i = 0; i < n; ++i) sol.x[i] = i * h;

    std::vector<double> U(N);
    for (int i = 0; i < n; ++i) {
        U[idx(i, 0)] = std::log(p.c_init);
        U[idx(i, 1)] = std::log(p.c_init);
        // stated initial potential; only seeds the consistency solve below
        U[idx(i, 2)] = 0.05 * (1.0 - std::cos(M_PI * sol.x[i] / p.L));
    }

    // the potential is elliptic: replace the seed with the field consistent
    // with the initial concentrations (Poisson is linear in phi)
    {
        BandedMatrix P(n, 5, 5);
        std::vector<double> rhs(n, 0.0);
        P.at(0, 0) = 1.0;
        rhs[0] = p.phi_left;
        P.at(n - 1, n - 1) = 1.0;
        rhs[n - 1] = p.phi_right;
        for (int i = 1; i < n - 1; ++i) {
            for (std::size_t k = 0; k < d2[i].w.size(); ++k)
                P.add(i, d2[i].start + (int)k, p.eps * d2[i].w[k]);
            rhs[i] = -pc.F * (p.z1 * std::exp(U[idx(i, 0)]) +
                              p.z2 * std::exp(U[idx(i, 1)]));
        }
        P.solve(rhs);
        for (int i = 0; i < n; ++i) U[idx(i, 2)] = rhs[i];
    }
    std::vector<double> U_old = U, U_older = U;

    const double drift1 = pc.F * p.z1 / (pc.R * pc.T);
    const double drift2 = pc.F * p.z2 / (pc.R * pc.T);
    const int band = 3 * 6;
    BandedMatrix J(N, band, band);
    std::vector<double> res(N);
    std::vector<double> rhs_old(2 * n, 0.0);

    // flux at x_{j+1/2}: F = e^{w_h} (-D (w'_h + drift phi'_h) + u) with the
    // half-node values interpolated from the log variables; the wall fluxes
    // are identically zero, so the trapezoid mass is a discrete invariant
    double dF_dw[hw], dF_dphi[hw];
    auto flux_at = [&](int j, int f, double D, double drift,
                       const std::vector<double>& u, bool want_jac) {
        const auto& s = half[j];
        double w_h = 0.0, w_d = 0.0, p_d = 0.0;
        for (int k = 0; k < hw; ++k) {
            const int node = s.start + k;
            w_h += s.wv[k] * u[idx(node, f)];
            w_d += s.wd[k] * u[idx(node, f)];
            p_d += s.wd[k] * u[idx(node, 2)];
        }
        const double ch = std::exp(w_h);
        const double G = -D * (w_d + drift * p_d) + p.u;
        if (want_jac)
            for (int k = 0; k < hw; ++k) {
                dF_dw[k] = ch * (s.wv[k] * G - D * s.wd[k]);
                dF_dphi[k] = ch * (-D * drift * s.wd[k]);
            }
        return ch * G;
    };

    auto row_pass = [&](double a0, const std::vector<double>& u,
                        std::vector<double>& r, bool assemble_matrix) {
        if (assemble_matrix) J.zero();
        for (int f = 0; f < 2; ++f) {
            const double D = (f == 0) ? p.D1 : p.D2;
            const double drift = (f == 0) ? drift1 : drift2;
            double F_prev = 0.0; // wall flux at the left boundary
            for (int i = 0; i < n; ++i) {
                const double cell = (i == 0 || i == n - 1) ? 0.5 * h : h;
                const double F_next =
                    (i == n - 1) ? 0.0 : flux_at(i, f, D, drift, u, false);
                const double ci = std::exp(u[idx(i, f)]);
                const int row = idx(i, f);
                r[row] = a0 * ci - rhs_old[2 * i + f] +
                         (F_next - F_prev) / cell;
                if (assemble_matrix) {
                    J.add(row, idx(i, f), a0 * ci);
                    if (i != n - 1) {
                        flux_at(i, f, D, drift, u, true);
                        for (int k = 0; k < hw; ++k) {
                            const int node = half[i].start + k;
                            J.add(row, idx(node, f), dF_dw[k] / cell);
                            J.add(row, idx(node, 2), dF_dphi[k] / cell);
                        }
                    }
                    if (i != 0) {
                        flux_at(i - 1, f, D, drift, u, true);
                        for (int k = 0; k < hw; ++k) {
                            const int node = half[i - 1].start + k;
                            J.add(row, idx(node, f), -dF_dw[k] / cell);
                            J.add(row, idx(node, 2), -dF_dphi[k] / cell);
                        }
                    }
                }
                F_prev = F_next;
            }
        }
        for (int i = 0; i < n; ++i) {
            const int row = idx(i, 2);
            if (i == 0 || i == n - 1) {
                r[row] = u[row] - (i == 0 ? p.phi_left : p.phi_right);
                if (assemble_matrix) J.add(row, row, 1.0);
            } else {
                double p_d2 = 0.0;
                for (std::size_t k = 0; k < d2[i].w.size(); ++k)
                    p_d2 += d2[i].w[k] * u[idx(d2[i].start + (int)k, 2)];
                const double c1i = std::exp(u[idx(i, 0)]);
                const double c2i = std::exp(u[idx(i, 1)]);
                r[row] = p.eps * p_d2 + pc.F * (p.z1 * c1i + p.z2 * c2i);
                if (assemble_matrix) {
                    for (std::size_t k = 0; k < d2[i].w.size(); ++k)
                        J.add(row, idx(d2[i].start + (int)k, 2),
                              p.eps * d2[i].w[k]);
                    J.add(row, idx(i, 0), pc.F * p.z1 * c1i);
                    J.add(row, idx(i, 1), pc.F * p.z2 * c2i);
                }
            }
        }
    };

    // scaled residual norm so the stiff species rows do not mask the rest
    const double dphi =
        std::abs(p.phi_right - p.phi_left) + pc.R * pc.T / pc.F;
    auto merit = [&](double a0, const std::vector<double>& r) {
        const double ws = 1.0 / (a0 * p.c_init);
        const double wp = 1.0 / (pc.F * p.c_init);
        double m = 0.0;
        for (int i = 0; i < n; ++i) {
            m = std::max(m, ws * std::abs(r[idx(i, 0)]));
            m = std::max(m, ws * std::abs(r[idx(i, 1)]));
            const double wph = (i == 0 || i == n - 1) ? 1.0 / dphi : wp;
            m = std::max(m, wph * std::abs(r[idx(i, 2)]));
        }
        return m;
    };

    // damped Newton on the implicit step, driven to the roundoff floor so the
    // leftover residual cannot accumulate into a mass drift; returns the
    // iteration count or -1 on failure
    std::vector<double> trial(N), rt(N);
    auto newton_solve = [&](double a0) {
        row_pass(a0, U, res, false);
        double rnorm = merit(a0, res);
        for (int it = 0;; ++it) {
            if (rnorm < 1e-13) return it;
            if (it >= p.newton.max_iters) return -1;
            row_pass(a0, U, res, true);
            std::vector<double> step_vec(res);
            for (double& v : step_vec) v = -v;
            J.solve(step_vec);
            double lambda = 1.0;
            bool accepted = false;
            for (int cut = 0; cut < 30; ++cut) {
                for (int k = 0; k < N; ++k)
                    trial[k] = U[k] + lambda * step_vec[k];
                row_pass(a0, trial, rt, false);
                const double m = merit(a0, rt);
                if (m < rnorm) {
                    accepted = true;
                    rnorm = m;
                    break;
                }
                lambda *= 0.5;
            }
            if (!accepted) return rnorm < 1e-10 ? it : -1;
            U = trial;
            std::swap(res, rt);
        }
    };

    // adaptive sub-stepping: the EDL charging transient is too stiff for a
    // fixed large implicit step, so halve on Newton failure and regrow after
    // easy successes; p.dt caps the step so accuracy is never worse than the
    // nominal uniform-step run. Variable-step BDF2 after the first step.
    const double t_end = p.t_end;
    double t = 0.0, h_prev = 0.0, dt_try = p.dt;
    bool have_two = false;
    while (t < t_end * (1.0 - 1e-12)) {
        double dt_cur = std::min(dt_try, t_end - t);
        for (;;) {
            double a0;
            if (have_two) {
                const double r = dt_cur / h_prev;
                a0 = (1.0 + 2.0 * r) / ((1.0 + r) * dt_cur);
                const double b1 = (1.0 + r) / dt_cur;
                const double b2 = r * r / ((1.0 + r) * dt_cur);
                for (int i = 0; i < n; ++i)
                    for (int f = 0; f < 2; ++f)
                        rhs_old[2 * i + f] =
                            b1 * std::exp(U_old[idx(i, f)]) -
                            b2 * std::exp(U_older[idx(i, f)]);
                // linear predictor in the log variables
                for (int k = 0; k < N; ++k)
                    U[k] = U_old[k] + (U_old[k] - U_older[k]) * r;
            } else {
                a0 = 1.0 / dt_cur;
                for (int i = 0; i < n; ++i)
                    for (int f = 0; f < 2; ++f)
                        rhs_old[2 * i + f] = std::exp(U_old[idx(i, f)]) / dt_cur;
                U = U_old;
            }
            const int its = newton_solve(a0);
            if (std::getenv("PNP_DEBUG_NEWTON"))
                std::fprintf(stderr, "t %.4e dt %.4e its %d\n", t, dt_cur, its);
            if (its >= 0) {
                U_older = U_old;
                U_old = U;
                t += dt_cur;
                h_prev = dt_cur;
                have_two = true;
                dt_try = (its <= 6) ? std::min(p.dt, dt_cur * 1.5) : dt_cur;
                break;
            }
            dt_cur *= 0.5;
            if (dt_cur < 1e-9 * p.dt)
                throw OracleError(
                    "solve_two_species: time step collapsed at t = " +
                    std::to_string(t));
        }
    }

    sol.c1.resize(n);
    sol.c2.resize(n);
    sol.phi.resize(n);
    for (int i = 0; i < n; ++i) {
        sol.c1[i] = std::exp(U[idx(i, 0)]);
        sol.c2[i] = std::exp(U[idx(i, 1)]);
        sol.phi[i] = U[idx(i, 2)];
    }
    // trapezoid totals: the exact discrete invariant of the flux form
    auto trapz = [&](const std::vector<double>& c) {
        double s = 0.5 * (c.front() + c.back());
        for (int i = 1; i < n - 1; ++i) s += c[i];
        return s * h;
    };
    sol.mass1 = trapz(sol.c1);
    sol.mass2 = trapz(sol.c2);
    return sol;
}

ReactiveInterfaceSolution
solve_reactive_interface(const ReactiveInterfaceProblem& p) {
    const int n = p.nodes_per_side;
    if (n < 7 || n % 2 == 0)
        throw OracleError("solve_reactive_interface: nodes must be odd >= 7");
    const double hf = (p.x_interface - p.x_left) / (n - 1);
    const double hs = (p.x_right - p.x_interface) / (n - 1);

    ReactiveInterfaceSolution sol;
    sol.x_f.resize(n);
    sol.x_s.resize(n);
    for (int i = 0; i < n; ++i) {
        sol.x_f[i] = p.x_left + i * hf;
        sol.x_s[i] = p.x_interface + i * hs;
    }

    if (p.k_f == 0.0 && p.k_r == 0.0) {
        // decoupled limit: zero interface flux, all mass stays in the fluid
        // where the transient starts; steady fluid profile is C exp(u x / D)
        double M0 = p.total_mass;
        if (M0 == 0.0) {
            const int m = 4001;
            std::vector<double> xg(m), fg(m);
            for (int i = 0; i < m; ++i) {
                xg[i] = p.x_left + (p.x_interface - p.x_left) * i / (m - 1);
                fg[i] = std::exp(-200.0 * (xg[i] + 0.5) * (xg[i] + 0.5));
            }
            M0 = simpson_mass(xg, fg);
        }
        sol.c_f.resize(n);
        sol.c_s.assign(n, 0.0);
        for (int i = 0; i < n; ++i)
            sol.c_f[i] = std::exp(p.u * sol.x_f[i] / p.D_f);
        const double scale = M0 / simpson_mass(sol.x_f, sol.c_f);
        for (double& v : sol.c_f) v *= scale;
        sol.interface_flux = 0.0;
        return sol;
    }

    const int N = 2 * n;
    BandedMatrix A(N, 8, 8);
    std::vector<double> b(N, 0.0);
    auto fidx = [](int i) { return i; };
    auto sidx = [n](int i) { return n + i; };

    // fluid interior: u c' - D c'' = 0
    for (int i = 1; i < n - 1; ++i) {
        const auto s1 = deriv_stencil(i, n, hf, 1);
        const auto s2 = deriv_stencil(i, n, hf, 2);
        for (std::size_t k = 0; k < s1.w.size(); ++k)
            A.add(fidx(i), fidx(s1.start + (int)k), p.u * s1.w[k]);
        for (std::size_t k = 0; k < s2.w.size(); ++k)
            A.add(fidx(i), fidx(s2.start + (int)k), -p.D_f * s2.w[k]);
    }
    // solid interior: c'' = 0
    for (int i = 1; i < n - 1; ++i) {
        const auto s2 = deriv_stencil(i, n, hs, 2);
        for (std::size_t k = 0; k < s2.w.size(); ++k)
            A.add(sidx(i), sidx(s2.start + (int)k), s2.w[k]);
    }
    // row 0: scale normalisation c_f(left wall) = 1. The steady system is
    // homogeneous, so the left no-flux condition is implied by the other
    // rows and can be traded for a scale fix; mass sets the scale below.
    A.at(0, fidx(0)) = 1.0;
    b[0] = 1.0;
    // fluid interface row: flux continuity u c_f - D_f c_f' = -D_s c_s'
    {
        const auto sf = deriv_stencil(n - 1, n, hf, 1);
        const auto ss = deriv_stencil(0, n, hs, 1);
        A.add(fidx(n - 1), fidx(n - 1), p.u);
        for (std::size_t k = 0; k < sf.w.size(); ++k)
            A.add(fidx(n - 1), fidx(sf.start + (int)k), -p.D_f * sf.w[k]);
        for (std::size_t k = 0; k < ss.w.size(); ++k)
            A.add(fidx(n - 1), sidx(ss.start + (int)k), p.D_s * ss.w[k]);
    }
    // solid interface row: -D_s c_s' = k_r c_f - k_f c_s
    {
        const auto ss = deriv_stencil(0, n, hs, 1);
        for (std::size_t k = 0; k < ss.w.size(); ++k)
            A.add(sidx(0), sidx(ss.start + (int)k), -p.D_s * ss.w[k]);
        A.add(sidx(0), fidx(n - 1), -p.k_r);
        A.add(sidx(0), sidx(0), p.k_f);
    }
    // solid right wall: no flux
    {
        const auto ss = deriv_stencil(n - 1, n, hs, 1);
        for (std::size_t k = 0; k < ss.w.size(); ++k)
            A.add(sidx(n - 1), sidx(ss.start + (int)k), ss.w[k]);
    }

    A.solve(b);
    sol.c_f.assign(b.begin(), b.begin() + n);
    sol.c_s.assign(b.begin() + n, b.end());

    double M0 = p.total_mass;
    if (M0 == 0.0) {
        // transient initial condition: Gaussian exp(-200 (x+1/2)^2) in the fluid
        const int m = 4001;
        std::vector<double> xg(m), fg(m);
        for (int i = 0; i < m; ++i) {
            xg[i] = p.x_left + (p.x_interface - p.x_left) * i / (m - 1);
            fg[i] = std::exp(-200.0 * (xg[i] + 0.5) * (xg[i] + 0.5));
        }
        M0 = simpson_mass(xg, fg);
    }
    const double mass =
        simpson_mass(sol.x_f, sol.c_f) + simpson_mass(sol.x_s, sol.c_s);
    const double scale = M0 / mass;
    for (double& v : sol.c_f) v *= scale;
    for (double& v : sol.c_s) v *= scale;

    const auto sf = deriv_stencil(n - 1, n, hf, 1);
    double cfp = 0.0;
    for (std::size_t k = 0; k < sf.w.size(); ++k)
        cfp += sf.w[k] * sol.c_f[sf.start + (int)k];
    sol.interface_flux = p.u * sol.c_f[n - 1] - p.D_f * cfp;
    return sol;
}

} // namespace pnp
