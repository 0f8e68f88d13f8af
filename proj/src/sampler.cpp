// SPDX-License-Identifier: Apache-2.0
#include "epsqmc/sampler.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

#include "epsqmc/error.hpp"
#include "epsqmc/parallel.hpp"
#include "epsqmc/rng.hpp"

namespace epsqmc
{
namespace
{

std::string fmt(double x)
{
    std::ostringstream os;
    os.precision(6);
    os << x;
    return os.str();
}

// Rough throughput of the history loop, steps per second per worker.
constexpr double kStepsPerSecond = 5e7;

}  // namespace

const char* to_string(SamplerStrategy s)
{
    return s == SamplerStrategy::uniform ? "uniform" : "importance";
}

SamplerStrategy parse_sampler_strategy(const std::string& name)
{
    if (name == "uniform")
    {
        return SamplerStrategy::uniform;
    }
    if (name == "importance")
    {
        return SamplerStrategy::importance;
    }
    throw ValidationError("unknown sampler strategy \"" + name + "\" (expected uniform or importance)");
}

void RunConfig::validate() const
{
    lattice.validate();
    kernel.validate();
    if (histories < 1)
    {
        throw ValidationError("histories must be >= 1");
    }
    if (!(v > 0.0 && v < 1.0))
    {
        throw ValidationError("v = " + fmt(v) + " must lie strictly inside (0, 1)");
    }
    if (strategy == SamplerStrategy::importance && v != 0.5)
    {
        throw ValidationError("importance strategy encodes signs as g in {0, 2}, which needs v = 0.5");
    }
    if (potentials.time_dependent() && potentials.size() != static_cast<std::size_t>(lattice.n_slices))
    {
        throw ValidationError("per-slice potentials: expected " + std::to_string(lattice.n_slices)
                              + " slices, got " + std::to_string(potentials.size()));
    }
}

BinExcess excess(std::uint64_t h0, std::uint64_t h1, double v, double n_scale,
                 std::uint64_t histories)
{
    BinExcess e;
    if (h0 + h1 == 0 || histories == 0)
    {
        return e;
    }
    double H = static_cast<double>(histories);
    double c0 = static_cast<double>(h0);
    double c1 = static_cast<double>(h1);
    // per-history score X = n_scale * 1[bin] * (1[state 0] - v)
    double mean = (c0 - v * (c0 + c1)) / H;
    double second = (c0 * (1.0 - v) * (1.0 - v) + c1 * v * v) / H;
    e.value = n_scale * mean;
    e.std_error = n_scale * std::sqrt(std::max(0.0, second - mean * mean) / H);
    return e;
}

CostEstimate estimate_cost(const RunConfig& config, const WignerTable& wigner,
                           const TransitionTable& table)
{
    config.validate();
    CostEstimate est;
    const double n = static_cast<double>(table.size());
    const int steps = table.chained_steps();
    est.max_abs_weight = table.diagnostics().max_abs_weight;
    est.per_step_factor = config.strategy == SamplerStrategy::uniform
                              ? n
                              : table.diagnostics().max_row_abs_mass;
    est.n_scale = n * n * std::pow(est.per_step_factor, steps) / wigner.scale();
    // per-history score variance is at most n_scale^2 / 4
    est.predicted_relative_stderr = 0.5 * est.n_scale / std::sqrt(static_cast<double>(config.histories));
    est.feasible = std::isfinite(est.n_scale) && est.predicted_relative_stderr <= 1.0;
    double seconds = static_cast<double>(config.histories) * (steps + 1) / kStepsPerSecond;
    est.runtime_class = seconds < 1.0 ? "seconds" : seconds < 600.0 ? "minutes" : "hours";
    return est;
}

RunResult run(const RunConfig& config, const WignerTable& wigner, const TransitionTable& table)
{
    auto start = std::chrono::steady_clock::now();
    config.validate();
    const std::size_t n = table.size();
    const int steps = table.chained_steps();
    if (wigner.size() != n || static_cast<std::size_t>(config.lattice.n_points) != n
        || steps != config.lattice.n_slices - 1)
    {
        throw ValidationError("sampler: lattice, kernel table and Wigner table dimensions differ");
    }
    if (std::abs(wigner.reference() - config.v) > 1e-15)
    {
        throw ValidationError("sampler: Wigner table was built for a different reference v");
    }
    table.check_reference(config.v);
    CostEstimate cost = estimate_cost(config, wigner, table);
    const bool importance = config.strategy == SamplerStrategy::importance;
    const double bound = cost.per_step_factor;
    if (importance && !(bound > 0))
    {
        throw NumericalError("importance sampling: every kernel row vanishes", bound);
    }
    const double v = config.v;

    unsigned workers = resolve_workers(config.workers);
    std::vector<std::vector<std::uint64_t>> shard_counts(workers);
    parallel_shards(config.histories, workers, [&](std::uint64_t begin, std::uint64_t end, unsigned s) {
        std::vector<std::uint64_t> counts(2 * n, 0);
        for (std::uint64_t h = begin; h < end; ++h)
        {
            CounterRng rng(config.seed, h);
            std::uint64_t pair = rng.below(n * n);
            std::size_t prev = pair / n;
            std::size_t now = pair % n;
            int state = rng.bernoulli(wigner.lambda(prev, now)) ? 0 : 1;
            for (int slice = 1; slice <= steps; ++slice)
            {
                std::size_t next;
                double g;
                if (!importance)
                {
                    next = rng.below(n);
                    g = 1.0 - table.weight(slice, prev, now, next);
                }
                else
                {
                    double abs_mass = table.row_abs_mass(slice, prev, now);
                    if (rng.uniform() * bound < abs_mass)
                    {
                        // successor with probability |k| / abs_mass, sign as a swap
                        double target = rng.uniform() * abs_mass;
                        next = n - 1;
                        double acc = 0.0;
                        for (std::size_t c = 0; c < n; ++c)
                        {
                            acc += std::abs(table.weight(slice, prev, now, c));
                            if (target < acc)
                            {
                                next = c;
                                break;
                            }
                        }
                        g = table.weight(slice, prev, now, next) < 0.0 ? 2.0 : 0.0;
                    }
                    else
                    {
                        // killed: relax to the reference vector, walk on uniformly
                        next = rng.below(n);
                        g = 1.0;
                    }
                }
                double leave = state == 0 ? g * (1.0 - v) : g * v;
                if (leave > 0.0 && rng.bernoulli(leave))
                {
                    state = 1 - state;
                }
                prev = now;
                now = next;
            }
            ++counts[static_cast<std::size_t>(state) * n + now];
        }
        shard_counts[s] = std::move(counts);
    });

    RunResult result;
    result.histories = config.histories;
    result.n_scale = cost.n_scale;
    result.bin_center = config.lattice.grid();
    result.h0.assign(n, 0);
    result.h1.assign(n, 0);
    for (const auto& counts : shard_counts)
    {
        if (counts.empty())
        {
            continue;
        }
        for (std::size_t i = 0; i < n; ++i)
        {
            result.h0[i] += counts[i];
            result.h1[i] += counts[n + i];
        }
    }
    result.q_hat.resize(n);
    result.std_error.resize(n);
    for (std::size_t i = 0; i < n; ++i)
    {
        BinExcess e = excess(result.h0[i], result.h1[i], v, result.n_scale, result.histories);
        result.q_hat[i] = e.value;
        result.std_error[i] = e.std_error;
    }

    auto& d = result.diagnostics;
    const auto& td = table.diagnostics();
    d.max_leakage = td.max_leakage;
    d.mean_leakage = td.mean_leakage;
    d.strategies = td.strategies;
    d.warnings = td.warnings;
    d.wigner_scale = wigner.scale();
    d.lambda_min = 1.0;
    d.lambda_max = 0.0;
    for (std::size_t a = 0; a < n; ++a)
    {
        for (std::size_t b = 0; b < n; ++b)
        {
            d.lambda_min = std::min(d.lambda_min, wigner.lambda(a, b));
            d.lambda_max = std::max(d.lambda_max, wigner.lambda(a, b));
        }
    }
    d.predicted_relative_stderr = cost.predicted_relative_stderr;
    if (!cost.feasible)
    {
        d.warnings.push_back("predicted relative standard error " + fmt(cost.predicted_relative_stderr)
                             + " exceeds 100%");
    }
    d.wall_clock_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return result;
}

RunResult run(const RunConfig& config, std::span<const Complex> psi0)
{
    config.validate();
    WignerTable wigner = wigner_init(psi0, config.potentials.at(0), config.lattice, config.v,
                                     config.workers);
    TransitionTable table(config.lattice, config.potentials, config.kernel, config.workers);
    return run(config, wigner, table);
}

}  // namespace epsqmc
