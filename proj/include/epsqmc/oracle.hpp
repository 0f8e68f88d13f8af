// SPDX-License-Identifier: Apache-2.0
//---------------------------------------------------------------------------//
/*!
 * Deterministic references for the Monte Carlo engine: the exact signed path
 * sum on the lattice, the time-slice Feynman amplitude, and a Crank-Nicolson
 * integrator for the Schrodinger equation. All quantities are
 * nondimensional; one time slice is one unit of time.
 */
//---------------------------------------------------------------------------//
#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "epsqmc/lattice.hpp"

namespace epsqmc
{

/// Exact discretised path sum: probability per final bin.
std::vector<double> transfer_path_sum(const LatticeSpec& spec, const TransitionTable& table,
                                      const WignerTable& wigner, unsigned workers = 1);

struct AmplitudeResult
{
    std::vector<Complex> psi;
    double norm = 0;
    std::vector<std::string> warnings;
};

AmplitudeResult feynman_amplitude(const LatticeSpec& spec, const SlicePotentials& potentials,
                                  std::span<const Complex> psi0);

struct ReferenceResult
{
    std::vector<Complex> psi;
    std::vector<double> density;  //!< |psi|^2 per grid point
    double norm = 0;
};

/// Crank-Nicolson propagation on the grid of `spec` with Dirichlet walls.
/// Time-dependent potentials switch at integer times (slice boundaries).
ReferenceResult schrodinger_reference(std::span<const Complex> psi0,
                                      const SlicePotentials& potentials, double total_time,
                                      int steps, const LatticeSpec& spec);

struct CompareReport
{
    double l2 = 0;
    double max_abs = 0;
    bool has_z = false;
    std::vector<double> z;
    double fraction_within = 0;  //!< share of bins with |z| <= z_limit
    double z_limit = 4.0;
};

CompareReport compare(std::span<const double> a, std::span<const double> b,
                      std::optional<std::span<const double>> errors = std::nullopt,
                      double z_limit = 4.0);

}  // namespace epsqmc
