// SPDX-License-Identifier: Apache-2.0
#include "epsqmc/oracle.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "epsqmc/error.hpp"
#include "epsqmc/parallel.hpp"

namespace epsqmc
{

std::vector<double> transfer_path_sum(const LatticeSpec& spec, const TransitionTable& table,
                                      const WignerTable& wigner, unsigned workers)
{
    spec.validate();
    const std::size_t n = table.size();
    if (wigner.size() != n || static_cast<std::size_t>(spec.n_points) != n
        || table.chained_steps() != spec.n_slices - 1)
    {
        throw ValidationError("transfer_path_sum: lattice, kernel table and Wigner table "
                              "dimensions differ");
    }
    // state(a, b): signed weight of all partial paths ending in (u_{l-1}, u_l) = (a, b)
    std::vector<double> state(n * n), next(n * n);
    for (std::size_t a = 0; a < n; ++a)
    {
        for (std::size_t b = 0; b < n; ++b)
        {
            state[a * n + b] = wigner.weight(a, b);
        }
    }
    workers = resolve_workers(workers);
    for (int slice = 1; slice <= table.chained_steps(); ++slice)
    {
        // Gather form: each target pair (b, c) is written by one shard.
        parallel_shards(n, workers, [&](std::uint64_t begin, std::uint64_t end, unsigned) {
            for (std::size_t b = begin; b < end; ++b)
            {
                for (std::size_t c = 0; c < n; ++c)
                {
                    double sum = 0.0;
                    for (std::size_t a = 0; a < n; ++a)
                    {
                        double s = state[a * n + b];
                        if (s != 0.0)
                        {
                            sum += s * table.weight(slice, a, b, c);
                        }
                    }
                    next[b * n + c] = sum;
                }
            }
        });
        state.swap(next);
    }
    std::vector<double> q(n, 0.0);
    for (std::size_t b = 0; b < n; ++b)
    {
        for (std::size_t c = 0; c < n; ++c)
        {
            q[c] += state[b * n + c];
        }
    }
    return q;
}

AmplitudeResult feynman_amplitude(const LatticeSpec& spec, const SlicePotentials& potentials,
                                  std::span<const Complex> psi0)
{
    spec.validate();
    const auto n = static_cast<std::size_t>(spec.n_points);
    const double du = spec.spacing();
    if (psi0.size() != n)
    {
        throw ValidationError("feynman_amplitude: initial state size differs from grid");
    }
    double norm0 = discrete_norm(psi0, du);
    if (std::abs(norm0 - 1.0) > 1e-6)
    {
        throw ValidationError("feynman_amplitude: initial state not normalised");
    }
    // (2 pi i)^(-1/2) exp(i d^2 / 2) du, tabulated by index distance
    const Complex prefactor = std::polar(1.0 / std::sqrt(2.0 * std::numbers::pi),
                                         -0.25 * std::numbers::pi);
    std::vector<Complex> free(n);
    for (std::size_t d = 0; d < n; ++d)
    {
        double x = static_cast<double>(d) * du;
        free[d] = prefactor * std::polar(du, 0.5 * x * x);
    }
    AmplitudeResult out;
    out.psi.assign(psi0.begin(), psi0.end());
    std::vector<Complex> src(n), next(n);
    for (int l = 0; l < spec.n_slices; ++l)
    {
        const Potential& pot = potentials.at(l);
        for (std::size_t j = 0; j < n; ++j)
        {
            src[j] = out.psi[j] * std::polar(1.0, -pot.value(spec.point(j)));
        }
        for (std::size_t i = 0; i < n; ++i)
        {
            Complex sum{};
            for (std::size_t j = 0; j < n; ++j)
            {
                sum += free[i > j ? i - j : j - i] * src[j];
            }
            next[i] = sum;
        }
        out.psi.swap(next);
    }
    out.norm = discrete_norm(out.psi, du);
    if (std::abs(out.norm - 1.0) > 0.05)
    {
        std::ostringstream os;
        os << "Feynman amplitude norm drifted to " << out.norm << "; grid too coarse";
        out.warnings.push_back(os.str());
    }
    return out;
}

ReferenceResult schrodinger_reference(std::span<const Complex> psi0,
                                      const SlicePotentials& potentials, double total_time,
                                      int steps, const LatticeSpec& spec)
{
    spec.validate();
    const auto n = static_cast<std::size_t>(spec.n_points);
    const double du = spec.spacing();
    if (psi0.size() != n)
    {
        throw ValidationError("schrodinger_reference: initial state size differs from grid");
    }
    if (std::abs(discrete_norm(psi0, du) - 1.0) > 1e-6)
    {
        throw ValidationError("schrodinger_reference: initial state not normalised");
    }
    if (steps < 1 || !(total_time >= 0))
    {
        throw ValidationError("schrodinger_reference: steps must be >= 1 and total_time >= 0");
    }
    const double dt = total_time / steps;
    const Complex half_i_dt(0.0, 0.5 * dt);
    const double kinetic = 0.5 / (du * du);

    ReferenceResult out;
    out.psi.assign(psi0.begin(), psi0.end());
    std::vector<Complex> rhs(n), diag(n), cprime(n), dprime(n);
    const Complex off = -half_i_dt * kinetic;  // (1 + i H dt/2) off-diagonal
    int factored_slice = -1;
    for (int s = 0; s < steps; ++s)
    {
        double t_mid = (s + 0.5) * dt;
        int slice = static_cast<int>(std::floor(t_mid));
        const Potential& pot = potentials.at(static_cast<std::size_t>(std::max(slice, 0)));
        if (slice != factored_slice || s == 0)
        {
            // Thomas factorisation of (1 + i H dt / 2)
            for (std::size_t i = 0; i < n; ++i)
            {
                double h = 2.0 * kinetic + pot.value(spec.point(i));
                diag[i] = 1.0 + half_i_dt * h;
            }
            cprime[0] = off / diag[0];
            for (std::size_t i = 1; i < n; ++i)
            {
                Complex denom = diag[i] - off * cprime[i - 1];
                if (std::abs(denom) < 1e-300)
                {
                    throw NumericalError("Crank-Nicolson tridiagonal solve failed", std::abs(denom));
                }
                cprime[i] = off / denom;
                diag[i] = denom;  // store pivots
            }
            factored_slice = slice;
        }
        // rhs = (1 - i H dt / 2) psi
        for (std::size_t i = 0; i < n; ++i)
        {
            double h = 2.0 * kinetic + pot.value(spec.point(i));
            Complex lap{};
            if (i > 0)
            {
                lap += out.psi[i - 1];
            }
            if (i + 1 < n)
            {
                lap += out.psi[i + 1];
            }
            rhs[i] = (1.0 - half_i_dt * h) * out.psi[i] + half_i_dt * kinetic * lap;
        }
        dprime[0] = rhs[0] / diag[0];
        for (std::size_t i = 1; i < n; ++i)
        {
            dprime[i] = (rhs[i] - off * dprime[i - 1]) / diag[i];
        }
        out.psi[n - 1] = dprime[n - 1];
        for (std::size_t i = n - 1; i-- > 0;)
        {
            out.psi[i] = dprime[i] - cprime[i] * out.psi[i + 1];
        }
    }
    out.density.resize(n);
    for (std::size_t i = 0; i < n; ++i)
    {
        out.density[i] = std::norm(out.psi[i]);
    }
    out.norm = discrete_norm(out.psi, du);
    return out;
}

CompareReport compare(std::span<const double> a, std::span<const double> b,
                      std::optional<std::span<const double>> errors, double z_limit)
{
    if (a.size() != b.size() || (errors && errors->size() != a.size()))
    {
        throw ValidationError("compare: binning mismatch (" + std::to_string(a.size()) + " vs "
                              + std::to_string(b.size()) + " bins)");
    }
    CompareReport r;
    r.z_limit = z_limit;
    double sq = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
    {
        double d = a[i] - b[i];
        sq += d * d;
        r.max_abs = std::max(r.max_abs, std::abs(d));
    }
    r.l2 = std::sqrt(sq);
    if (errors)
    {
        r.has_z = true;
        r.z.resize(a.size());
        std::size_t within = 0;
        for (std::size_t i = 0; i < a.size(); ++i)
        {
            double d = a[i] - b[i];
            double e = (*errors)[i];
            r.z[i] = e > 0 ? d / e : (d == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), d));
            if (std::abs(r.z[i]) <= z_limit)
            {
                ++within;
            }
        }
        r.fraction_within = a.empty() ? 1.0 : static_cast<double>(within) / static_cast<double>(a.size());
    }
    return r;
}

}  // namespace epsqmc
