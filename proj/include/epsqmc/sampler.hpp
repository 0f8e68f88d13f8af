// SPDX-License-Identifier: Apache-2.0
//---------------------------------------------------------------------------//
/*!
 * First-principles Monte Carlo over the lattice.
 *
 * Each history draws an initial pair (u0, u1) uniformly, starts in EPS state
 * 0 with probability lambda(u0, u1), then walks the Langevin lattice: every
 * chained step picks a successor, reads the kernel weight k for the implied
 * noise and performs one stochastic swap with g = 1 - k. Final positions and
 * states are histogrammed; the quantum probability per bin is the excess of
 * state 0 over the reference level, scaled by the deterministic factor
 * n_scale.
 */
//---------------------------------------------------------------------------//
#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "epsqmc/eps.hpp"
#include "epsqmc/lattice.hpp"

namespace epsqmc
{

enum class SamplerStrategy
{
    uniform,     //!< successor uniform over the grid
    importance,  //!< successor proportional to |k|; needs v = 1/2
};

const char* to_string(SamplerStrategy s);
SamplerStrategy parse_sampler_strategy(const std::string& name);

struct RunConfig
{
    std::uint64_t histories = 100000;
    std::uint64_t seed = 1;
    double v = kDefaultReference;
    SamplerStrategy strategy = SamplerStrategy::uniform;
    LatticeSpec lattice;
    SlicePotentials potentials;
    KernelSpec kernel;
    unsigned workers = 0;  //!< 0: hardware concurrency (capped by EPSQMC_MAX_WORKERS)

    void validate() const;
};

struct BinExcess
{
    double value = 0;
    double std_error = 0;
};

/// n_scale (h0 - v (h0 + h1)) / H with its multinomial standard error.
BinExcess excess(std::uint64_t h0, std::uint64_t h1, double v, double n_scale,
                 std::uint64_t histories);

struct RunResult
{
    std::vector<double> bin_center;
    std::vector<std::uint64_t> h0;
    std::vector<std::uint64_t> h1;
    std::uint64_t histories = 0;
    double n_scale = 0;
    std::vector<double> q_hat;
    std::vector<double> std_error;

    struct Diagnostics
    {
        double max_leakage = 0;
        double mean_leakage = 0;
        double lambda_min = 0;
        double lambda_max = 0;
        double wigner_scale = 0;
        double predicted_relative_stderr = 0;
        double wall_clock_seconds = 0;
        std::vector<std::string> strategies;
        std::vector<std::string> warnings;
    } diagnostics;
};

struct CostEstimate
{
    double n_scale = 0;
    double per_step_factor = 0;  //!< N (uniform) or max row sum |k| (importance)
    double predicted_relative_stderr = 0;
    double max_abs_weight = 0;
    bool feasible = false;
    std::string runtime_class;
};

CostEstimate estimate_cost(const RunConfig& config, const WignerTable& wigner,
                           const TransitionTable& table);

RunResult run(const RunConfig& config, const WignerTable& wigner, const TransitionTable& table);

/// Convenience: builds the Wigner and transition tables from psi0.
RunResult run(const RunConfig& config, std::span<const Complex> psi0);

}  // namespace epsqmc
