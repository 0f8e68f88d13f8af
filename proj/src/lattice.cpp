// SPDX-License-Identifier: Apache-2.0
#include "epsqmc/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <sstream>

#include "epsqmc/eps.hpp"
#include "epsqmc/error.hpp"
#include "epsqmc/parallel.hpp"

namespace epsqmc
{
namespace
{

std::string fmt(double x)
{
    std::ostringstream os;
    os.precision(10);
    os << x;
    return os.str();
}

void require(bool ok, const std::string& what)
{
    if (!ok)
    {
        throw ValidationError(what);
    }
}

void normalize(std::vector<Complex>& psi, double du)
{
    double norm = discrete_norm(psi, du);
    require(norm > 0, "initial state vanishes on the grid");
    double s = 1.0 / std::sqrt(norm);
    for (auto& z : psi)
    {
        z *= s;
    }
}

}  // namespace

//---------------------------------------------------------------------------//
void LatticeSpec::validate_units() const
{
    require(epsilon > 0 && std::isfinite(epsilon), "epsilon = " + fmt(epsilon) + " must be > 0");
    require(mass > 0 && std::isfinite(mass), "mass = " + fmt(mass) + " must be > 0");
    require(hbar > 0 && std::isfinite(hbar), "hbar = " + fmt(hbar) + " must be > 0");
}

void LatticeSpec::validate() const
{
    validate_units();
    require(n_slices >= 2, "n_slices = " + std::to_string(n_slices) + " must be >= 2");
    require(n_points >= 3, "n_points = " + std::to_string(n_points) + " must be >= 3");
    require(std::isfinite(u_min) && std::isfinite(u_max) && u_max > u_min,
            "u_max must exceed u_min (spacing > 0)");
}

std::vector<double> LatticeSpec::grid() const
{
    std::vector<double> g(n_points);
    for (int i = 0; i < n_points; ++i)
    {
        g[i] = point(i);
    }
    return g;
}

double LatticeSpec::length_scale() const
{
    validate_units();
    return std::sqrt(hbar * epsilon / mass);
}

double nondimensional_position(double x, const LatticeSpec& spec)
{
    return x / spec.length_scale();
}

double nondimensional_energy(double energy, const LatticeSpec& spec)
{
    spec.validate_units();
    return energy * spec.epsilon / spec.hbar;
}

Potential nondimensionalize(const Potential& physical, const LatticeSpec& spec)
{
    double s = spec.length_scale();
    double e = nondimensional_energy(1.0, spec);
    std::vector<double> c = physical.coefficients();
    double sp = 1.0;
    for (double& cj : c)
    {
        cj *= sp * e;
        sp *= s;
    }
    return Potential(std::move(c));
}

double langevin_step(double u_now, double u_prev, double y, const Potential& potential)
{
    return 2.0 * u_now - u_prev - potential.derivative(1, u_now) + y;
}

double noise_for_target(double u_target, double u_now, double u_prev, const Potential& potential)
{
    return u_target + u_prev - 2.0 * u_now + potential.derivative(1, u_now);
}

//---------------------------------------------------------------------------//
double discrete_norm(std::span<const Complex> psi, double spacing)
{
    double s = 0.0;
    for (const auto& z : psi)
    {
        s += std::norm(z);
    }
    return s * spacing;
}

std::vector<Complex> gaussian_state(const LatticeSpec& spec, double center, double width,
                                    double momentum)
{
    spec.validate();
    require(width > 0, "gaussian width must be > 0");
    std::vector<Complex> psi(spec.n_points);
    for (int i = 0; i < spec.n_points; ++i)
    {
        double d = spec.point(i) - center;
        psi[i] = std::polar(std::exp(-d * d / (4.0 * width * width)), momentum * spec.point(i));
    }
    normalize(psi, spec.spacing());
    return psi;
}

std::vector<Complex> oscillator_state(const LatticeSpec& spec, int n, double omega, double center)
{
    spec.validate();
    require(n >= 0, "oscillator level must be >= 0");
    require(omega > 0, "oscillator omega must be > 0");
    std::vector<Complex> psi(spec.n_points);
    for (int i = 0; i < spec.n_points; ++i)
    {
        // Hermite functions by the stable three-term recurrence
        double xi = std::sqrt(omega) * (spec.point(i) - center);
        double prev = 0.0;
        double cur = std::pow(omega / std::numbers::pi, 0.25) * std::exp(-0.5 * xi * xi);
        for (int k = 0; k < n; ++k)
        {
            double next = std::sqrt(2.0 / (k + 1)) * xi * cur - std::sqrt(double(k) / (k + 1)) * prev;
            prev = cur;
            cur = next;
        }
        psi[i] = cur;
    }
    normalize(psi, spec.spacing());
    return psi;
}

//---------------------------------------------------------------------------//
WignerTable::WignerTable(std::size_t n_points, double spacing, std::vector<double> values,
                         double v)
    : n_(n_points), du_(spacing), values_(std::move(values)), v_(v)
{
    require(values_.size() == n_ * n_, "Wigner table size mismatch");
    require(v > 0 && v < 1, "reference v = " + fmt(v) + " must lie strictly inside (0, 1)");
    double peak = 0.0;
    total_ = 0.0;
    for (double w : values_)
    {
        peak = std::max(peak, std::abs(w) * du_ * du_);
        total_ += w * du_ * du_;
    }
    require(peak > 0, "Wigner table vanishes");
    c_ = std::min(v, 1.0 - v) / peak;
}

WignerTable wigner_init(std::span<const Complex> psi0, const Potential& potential,
                        const LatticeSpec& spec, double v, unsigned workers)
{
    spec.validate();
    const auto n = static_cast<std::size_t>(spec.n_points);
    const double du = spec.spacing();
    require(psi0.size() == n, "initial state has " + std::to_string(psi0.size())
                                  + " samples, grid has " + std::to_string(n));
    double norm = discrete_norm(psi0, du);
    require(std::abs(norm - 1.0) <= 1e-6,
            "initial state not normalised: sum |psi|^2 du = " + fmt(norm));

    // psi and U at half-grid position h/2 (h = 0 .. 2N-2), linear interpolation
    std::vector<Complex> psi_half(2 * n - 1);
    std::vector<double> u_half(2 * n - 1);
    for (std::size_t h = 0; h < psi_half.size(); ++h)
    {
        psi_half[h] = (h % 2 == 0) ? psi0[h / 2] : 0.5 * (psi0[h / 2] + psi0[h / 2 + 1]);
        u_half[h] = potential.value(spec.u_min + 0.5 * static_cast<double>(h) * du);
    }
    auto at_half = [&](long h) -> std::pair<Complex, double> {
        if (h < 0 || h >= static_cast<long>(psi_half.size()))
        {
            return {Complex{}, 0.0};
        }
        return {psi_half[h], u_half[h]};
    };

    const long span = 2 * static_cast<long>(n - 1);
    std::vector<double> values(n * n);
    std::vector<double> imag(n, 0.0);
    parallel_shards(n, resolve_workers(workers), [&](std::uint64_t begin, std::uint64_t end, unsigned) {
        std::vector<Complex> terms(2 * span + 1);
        for (std::size_t i0 = begin; i0 < end; ++i0)
        {
            // term(m) = psi(u0 + m du/2) conj(psi(u0 - m du/2)) exp(-i[U(+) - U(-)])
            for (long m = -span; m <= span; ++m)
            {
                auto [pa, ua] = at_half(2 * static_cast<long>(i0) + m);
                auto [pb, ub] = at_half(2 * static_cast<long>(i0) - m);
                terms[m + span] = pa * std::conj(pb) * std::polar(1.0, -(ua - ub));
            }
            double max_im = 0.0;
            for (std::size_t i1 = 0; i1 < n; ++i1)
            {
                double p = (static_cast<double>(i1) - static_cast<double>(i0)) * du;
                Complex sum{};
                for (long m = -span; m <= span; ++m)
                {
                    sum += terms[m + span] * std::polar(1.0, -p * static_cast<double>(m) * du);
                }
                sum *= du / (2.0 * std::numbers::pi);
                values[i0 * n + i1] = sum.real();
                max_im = std::max(max_im, std::abs(sum.imag()));
            }
            imag[i0] = max_im;
        }
    });
    WignerTable table(n, du, std::move(values), v);
    double peak = 0.0;
    for (double w : table.values())
    {
        peak = std::max(peak, std::abs(w));
    }
    double residue = *std::max_element(imag.begin(), imag.end()) / peak;
    table.set_imaginary_residue(residue);
    if (residue > 1e-6)
    {
        throw NumericalError("Wigner table imaginary residue " + fmt(residue)
                                 + " of peak exceeds 1e-6; check the grid",
                             residue);
    }
    return table;
}

//---------------------------------------------------------------------------//
TransitionTable::TransitionTable(const LatticeSpec& spec, const SlicePotentials& potentials,
                                 const KernelSpec& kernel, unsigned workers)
{
    spec.validate();
    kernel.validate();
    n_ = static_cast<std::size_t>(spec.n_points);
    steps_ = spec.n_slices - 1;
    time_dependent_ = potentials.time_dependent();
    const std::size_t sets = time_dependent_ ? static_cast<std::size_t>(steps_) : 1;
    const double du = spec.spacing();
    const std::size_t width = 4 * n_ - 3;

    lines_.resize(sets * n_);
    parallel_shards(lines_.size(), resolve_workers(workers),
                    [&](std::uint64_t begin, std::uint64_t end, unsigned) {
                        for (std::size_t idx = begin; idx < end; ++idx)
                        {
                            std::size_t set = idx / n_;
                            std::size_t b = idx % n_;
                            const Potential& pot = potentials.at(time_dependent_ ? set + 1 : 1);
                            double ub = spec.point(b);
                            double shift = pot.derivative(1, ub);
                            std::vector<double> y(width);
                            for (std::size_t t = 0; t < width; ++t)
                            {
                                y[t] = (static_cast<double>(t) - 2.0 * static_cast<double>(n_ - 1)) * du
                                       + shift;
                            }
                            lines_[idx] = kernel_row(ub, pot, y, du, kernel);
                        }
                    });

    prefix_.resize(lines_.size());
    abs_prefix_.resize(lines_.size());
    std::set<std::string> used;
    for (std::size_t idx = 0; idx < lines_.size(); ++idx)
    {
        const auto& line = lines_[idx];
        used.insert(to_string(line.strategy));
        auto& pre = prefix_[idx];
        auto& apre = abs_prefix_[idx];
        pre.assign(width + 1, 0.0);
        apre.assign(width + 1, 0.0);
        for (std::size_t t = 0; t < width; ++t)
        {
            double k = line.weight(t);
            pre[t + 1] = pre[t] + k;
            apre[t + 1] = apre[t] + std::abs(k);
        }
    }
    diag_.strategies.assign(used.begin(), used.end());

    double leak_sum = 0.0;
    std::size_t pairs = 0;
    diag_.min_weight = 1.0;
    for (std::size_t set = 0; set < sets; ++set)
    {
        int slice = static_cast<int>(set) + 1;
        for (std::size_t b = 0; b < n_; ++b)
        {
            // noise indices reachable from this b
            const auto& line = lines_[set * n_ + b];
            for (std::size_t t = 2 * (n_ - 1) - 2 * b; t <= 4 * (n_ - 1) - 2 * b; ++t)
            {
                double k = line.weight(t);
                diag_.max_abs_weight = std::max(diag_.max_abs_weight, std::abs(k));
                diag_.min_weight = std::min(diag_.min_weight, k);
            }
            for (std::size_t a = 0; a < n_; ++a)
            {
                double leak = std::abs(1.0 - row_mass(slice, a, b));
                diag_.max_leakage = std::max(diag_.max_leakage, leak);
                diag_.max_row_abs_mass = std::max(diag_.max_row_abs_mass, row_abs_mass(slice, a, b));
                leak_sum += leak;
                ++pairs;
            }
        }
    }
    diag_.mean_leakage = leak_sum / static_cast<double>(pairs);
    if (diag_.max_leakage > kernel.tail_tolerance)
    {
        diag_.warnings.push_back("kernel row mass leakage up to " + fmt(diag_.max_leakage)
                                 + " (mean " + fmt(diag_.mean_leakage)
                                 + ") exceeds tail tolerance " + fmt(kernel.tail_tolerance)
                                 + "; widen the grid");
    }
}

double TransitionTable::window_sum(const std::vector<double>& prefix, std::size_t a,
                                   std::size_t b) const
{
    std::size_t lo = a + 2 * (n_ - 1) - 2 * b;
    return prefix[lo + n_] - prefix[lo];
}

double TransitionTable::row_mass(int slice, std::size_t a, std::size_t b) const
{
    return window_sum(prefix_[set_index(slice) * n_ + b], a, b);
}

double TransitionTable::row_abs_mass(int slice, std::size_t a, std::size_t b) const
{
    return window_sum(abs_prefix_[set_index(slice) * n_ + b], a, b);
}

void TransitionTable::check_reference(double v) const
{
    // The most negative weight is the tightest constraint on v.
    double g = 1.0 - diag_.min_weight;
    if (g > 1.0)
    {
        Interval iv = valid_v_interval(std::min(g, 2.0));
        if (!iv.contains(v))
        {
            throw ValidationError("reference v = " + fmt(v) + " outside valid interval ["
                                  + fmt(iv.lo) + ", " + fmt(iv.hi) + "] for kernel weight k = "
                                  + fmt(diag_.min_weight));
        }
    }
}

}  // namespace epsqmc
