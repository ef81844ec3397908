#pragma once

#include <vector>

#include "pnp/constants.hpp"

namespace pnp {

/// High-accuracy 1D references for the verification cases, built on a
/// discretisation family deliberately different from the FV solver:
/// 4th-order finite differences with Newton iteration on fine grids.

struct NewtonControls {
    double tol = 1e-12;
    int max_iters = 50;
};

// -- steady electro-osmotic channel -----------------------------------------

struct ChannelProblem {
    double H = 1e-6;        ///< channel height [m]
    double mu = 10.0;       ///< viscosity [Pa s]
    double eps = 40.0 * 8.854e-12; ///< permittivity [F/m]
    double phi_bottom = 0.0;
    double phi_top = 0.05;  ///< wall potential [V]
    double Jx = -1e13;      ///< constant body-force density [N/m³]
    double c_mean = 1e-3;   ///< prescribed channel-average concentration
    int z = 1;
    double T = 300.0;
    int nodes = 4001;       ///< odd (Simpson quadrature)
    NewtonControls newton;
};

struct ChannelSolution {
    std::vector<double> y, u, phi, c, p; ///< p gauge: p(0) = 0
};

/// Coupled reduced channel system: u from the forced Stokes balance,
/// phi from Poisson-Boltzmann with the mean-concentration gauge,
/// c Boltzmann-distributed, p integrated from the wall-normal balance.
ChannelSolution solve_channel(const ChannelProblem& p,
                              const PhysicalConstants& pc = {});

// -- transient two-species PNP ----------------------------------------------

struct TwoSpeciesProblem {
    double L = 1e-6;
    double D1 = 1e-6, D2 = 1e-6;
    int z1 = 1, z2 = -1;
    double eps = 6.042e-13;
    double u = 1e-3;        ///< frozen advecting velocity
    double phi_left = 0.0, phi_right = 0.1;
    double c_init = 1e-3;
    double T = 300.0;
    double t_end = 1e-5;
    double dt = 5e-9;
    int nodes = 2001;
    NewtonControls newton;
};

struct TwoSpeciesSolution {
    std::vector<double> x, c1, c2, phi;
    double mass1 = 0.0, mass2 = 0.0; ///< Simpson totals at t_end
};

/// Method of lines with BDF2 in time and Newton on the coupled
/// (c1, c2, phi) system; walls are zero total flux, phi is pinned at both
/// ends. The initial potential profile only seeds the first solve; the
/// consistent potential is recomputed from Poisson every step.
TwoSpeciesSolution solve_two_species(const TwoSpeciesProblem& p,
                                     const PhysicalConstants& pc = {});

// -- steady reactive two-domain interface -----------------------------------

struct ReactiveInterfaceProblem {
    double u = 1.0;        ///< fluid velocity (positive toward the interface)
    double D_f = 1.0, D_s = 1.0;
    double k_f = 10.0, k_r = 100.0;
    double x_left = -1.0, x_interface = 0.0, x_right = 1.0;
    double total_mass = 0.0; ///< 0 = integrate the initial Gaussian
    int nodes_per_side = 2001; ///< odd
};

struct ReactiveInterfaceSolution {
    std::vector<double> x_f, c_f, x_s, c_s;
    double interface_flux = 0.0; ///< zero at the no-outer-flux steady state
};

/// Steady advection-diffusion (fluid) / diffusion (solid) with the linear
/// interface rate j = k_r c_f - k_f c_s and no-flux outer walls. The steady
/// system is linear and homogeneous; the solution is normalised to the
/// prescribed total mass (defaulting to the transient initial Gaussian
/// exp(-200 (x+1/2)²) mass).
ReactiveInterfaceSolution
solve_reactive_interface(const ReactiveInterfaceProblem& p);

/// Simpson total of samples on a uniform grid (odd node count).
double simpson_mass(const std::vector<double>& x, const std::vector<double>& f);

} // namespace pnp
