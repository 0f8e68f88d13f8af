// SPDX-License-Identifier: Apache-2.0
#include "epsqmc/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <utility>
#include <numbers>
#include <sstream>

#include "epsqmc/airy.hpp"
#include "epsqmc/error.hpp"

namespace epsqmc
{
namespace
{

constexpr double kPi = std::numbers::pi;
// exp(-37) ~ 1e-16: damping has killed the integrand beyond this point
constexpr double kDampingExponent = 37.0;
constexpr long kMaxPanels = 20'000'000;
constexpr int kNevilleOrder = 5;

struct GaussRule
{
    std::vector<double> nodes;
    std::vector<double> weights;
};

// Gauss-Legendre on [-1, 1] by Newton iteration on P_n.
GaussRule gauss_legendre(int n)
{
    GaussRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    for (int i = 0; i < (n + 1) / 2; ++i)
    {
        double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
        double dp = 1.0;
        for (int iter = 0; iter < 100; ++iter)
        {
            double p1 = 1.0, p2 = 0.0;
            for (int j = 1; j <= n; ++j)
            {
                double p3 = p2;
                p2 = p1;
                p1 = ((2.0 * j - 1.0) * x * p2 - (j - 1.0) * p3) / j;
            }
            dp = n * (x * p1 - p2) / (x * x - 1.0);
            double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15)
            {
                break;
            }
        }
        double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.nodes[i] = -x;
        rule.nodes[n - 1 - i] = x;
        rule.weights[i] = rule.weights[n - 1 - i] = w;
    }
    return rule;
}

std::string fmt(double x)
{
    std::ostringstream os;
    os.precision(10);
    os << x;
    return os.str();
}

using CDouble = std::complex<double>;

CDouble tent_multiplier(CDouble w, double width)
{
    CDouble x = 0.5 * w * width;
    if (std::abs(x) < 1e-8)
    {
        return width;
    }
    CDouble s = std::sin(x) / x;
    return width * s * s;
}

// y w + phi(w) and its w-derivative at complex w.
std::pair<CDouble, CDouble> total_phase(double y, const PhasePolynomial& phase, CDouble w)
{
    CDouble value = 0.0, slope = 0.0;
    for (std::size_t j = phase.coeffs.size(); j-- > 0;)
    {
        slope = slope * w + value;
        value = value * w + phase.coeffs[j];
    }
    return {value + y * w, slope + y};
}

// Beyond this point the total phase slope keeps the sign of the leading
// coefficient and exceeds kTailSlope in magnitude.
constexpr double kTailSlope = 2.0;

double tail_start(double y, const PhasePolynomial& phase)
{
    std::size_t top = phase.coeffs.size() - 1;
    double lead = phase.coeffs[top] * static_cast<double>(top);
    double sign = lead > 0 ? 1.0 : -1.0;
    // Cauchy bound on the roots of sign * (y + phi'(w)) - kTailSlope
    double bound = 0.0;
    for (std::size_t j = 1; j < top; ++j)
    {
        bound = std::max(bound, std::abs(phase.coeffs[j] * static_cast<double>(j) / lead));
    }
    bound = std::max(bound, std::abs((y - sign * kTailSlope) / lead));
    bound = 1.0 + bound;
    if (top == 1)
    {
        return 0.0;
    }
    double h = bound / 4096.0;
    double last_bad = -h;
    for (double w = 0.0; w <= bound; w += h)
    {
        if (sign * (y + phase.slope(w)) < kTailSlope)
        {
            last_bad = w;
        }
    }
    return last_bad + h;
}

// (1/pi) Int_0^inf cos(y w + phi(w)) exp(-eta w^2) m(w) dw. The real axis is
// integrated up to `start`; the rest runs along a ray rotated into the
// sector where exp(i sign phi) decays, which leaves the value unchanged.
double damped_integral(double y, const PhasePolynomial& phase, double eta, double start,
                       const GaussRule& rule, double tent_width)
{
    double reach = std::sqrt(kDampingExponent / eta);
    bool with_tail = start < reach;
    double upper = std::min(reach, start);
    double widest = 0.5 / std::min(1.0, std::sqrt(eta));
    auto freq = [&](double w) { return std::abs(y + phase.slope(w)) + tent_width; };
    auto multiplier = [&](CDouble w) { return tent_width > 0 ? tent_multiplier(w, tent_width) : 1.0; };
    double sum = 0.0;
    double w = 0.0;
    long panels = 0;
    auto count_panel = [&] {
        if (++panels > kMaxPanels)
        {
            throw NumericalError("kernel quadrature exceeded "
                                     + std::to_string(kMaxPanels) + " panels",
                                 static_cast<double>(panels));
        }
    };
    while (w < upper)
    {
        double f = freq(w);
        double h = std::min(widest, kPi / std::max(f, 1e-300));
        double f2 = freq(w + h);
        if (f2 > f)
        {
            h = std::min(h, kPi / f2);
        }
        h = std::min(h, upper - w);
        double half = 0.5 * h;
        double mid = w + half;
        double panel = 0.0;
        for (std::size_t i = 0; i < rule.nodes.size(); ++i)
        {
            double x = mid + half * rule.nodes[i];
            panel += rule.weights[i] * std::cos(y * x + phase(x)) * std::exp(-eta * x * x)
                     * multiplier(x).real();
        }
        sum += half * panel;
        w += h;
        count_panel();
    }
    if (with_tail)
    {
        std::size_t top = phase.coeffs.size() - 1;
        double sign = phase.coeffs[top] > 0 ? 1.0 : -1.0;
        CDouble dir = std::polar(1.0, kPi / (2.0 * static_cast<double>(top)));
        auto integrand = [&](double t) {
            CDouble z = start + t * dir;
            auto [value, slope] = total_phase(y, phase, z);
            CDouble f = std::exp(CDouble(0.0, sign) * value - eta * z * z) * multiplier(z) * dir;
            return std::pair{f, std::abs(slope)};
        };
        double scale = std::abs(integrand(0.0).first);
        CDouble tail = 0.0;
        double t = 0.0;
        while (true)
        {
            auto [f, s] = integrand(t);
            if (t > 0 && std::abs(f) < 1e-18 * std::max(1.0, scale))
            {
                break;
            }
            double h = std::min(0.5, 1.0 / std::max(s, 1e-300));
            double half = 0.5 * h;
            CDouble panel = 0.0;
            for (std::size_t i = 0; i < rule.nodes.size(); ++i)
            {
                panel += rule.weights[i] * integrand(t + half + half * rule.nodes[i]).first;
            }
            tail += half * panel;
            t += h;
            count_panel();
        }
        sum += tail.real();
    }
    return sum / kPi;
}

double airy_tent_weight(double yj, double cubic, double width)
{
    static const GaussRule rule = gauss_legendre(8);
    double scale = std::cbrt(3.0 * std::abs(cubic));
    double zmax = (std::abs(yj) + width) / scale;
    double piece = scale * 0.25 / std::sqrt(std::max(1.0, zmax));
    auto pieces = static_cast<long>(std::ceil(width / piece));
    pieces = std::clamp(pieces, 1L, 100000L);
    double h = width / static_cast<double>(pieces);
    double total = 0.0;
    for (int side = -1; side <= 1; side += 2)
    {
        for (long p = 0; p < pieces; ++p)
        {
            double a = p * h;
            double mid = a + 0.5 * h;
            for (std::size_t i = 0; i < rule.nodes.size(); ++i)
            {
                double t = mid + 0.5 * h * rule.nodes[i];  // distance from yj
                total += 0.5 * h * rule.weights[i] * airy_kernel(yj + side * t, cubic)
                         * (1.0 - t / width);
            }
        }
    }
    return total;
}

}  // namespace

//---------------------------------------------------------------------------//
const char* to_string(KernelStrategy s)
{
    switch (s)
    {
        case KernelStrategy::automatic: return "auto";
        case KernelStrategy::delta: return "delta";
        case KernelStrategy::airy: return "airy";
        case KernelStrategy::quadrature: return "quadrature";
    }
    return "?";
}

const char* to_string(RowWeighting w)
{
    return w == RowWeighting::point ? "point" : "tent";
}

KernelStrategy parse_kernel_strategy(const std::string& name)
{
    for (auto s : {KernelStrategy::automatic, KernelStrategy::delta, KernelStrategy::airy,
                   KernelStrategy::quadrature})
    {
        if (name == to_string(s))
        {
            return s;
        }
    }
    throw ValidationError("unknown kernel strategy \"" + name
                          + "\" (expected auto, delta, airy or quadrature)");
}

RowWeighting parse_row_weighting(const std::string& name)
{
    if (name == "point")
    {
        return RowWeighting::point;
    }
    if (name == "tent")
    {
        return RowWeighting::tent;
    }
    throw ValidationError("unknown row weighting \"" + name + "\" (expected point or tent)");
}

void KernelSpec::validate() const
{
    auto need = [](bool ok, const std::string& what) {
        if (!ok)
        {
            throw ValidationError(what);
        }
    };
    need(damping > 0 && std::isfinite(damping), "kernel damping must be > 0");
    need(damping_ratio > 0 && damping_ratio < 1, "kernel damping_ratio must lie in (0, 1)");
    need(max_levels >= 2, "kernel max_levels must be >= 2");
    need(tolerance > 0, "kernel tolerance must be > 0");
    need(w_cutoff > 0, "kernel w_cutoff must be > 0");
    need(quadrature_points >= 2 && quadrature_points <= 64,
         "kernel quadrature_points must lie in [2, 64]");
    need(tail_tolerance >= 0, "kernel tail_tolerance must be >= 0");
}

//---------------------------------------------------------------------------//
PhasePolynomial PhasePolynomial::at(double u, const Potential& potential)
{
    PhasePolynomial p;
    int top = potential.highest_odd_order();
    if (top == 0)
    {
        return p;
    }
    p.coeffs.assign(top + 1, 0.0);
    double factorial = 1.0;  // (2k+1)!
    for (int order = 1; order <= top; ++order)
    {
        factorial *= order;
        if (order >= 3 && order % 2 == 1)
        {
            p.coeffs[order] = 2.0 * potential.derivative(order, u) / factorial;
        }
    }
    while (!p.coeffs.empty() && p.coeffs.back() == 0.0)
    {
        p.coeffs.pop_back();
    }
    return p;
}

double PhasePolynomial::operator()(double w) const
{
    double r = 0.0;
    for (auto i = coeffs.size(); i-- > 0;)
    {
        r = r * w + coeffs[i];
    }
    return r;
}

double PhasePolynomial::slope(double w) const
{
    double r = 0.0;
    for (auto i = coeffs.size(); i-- > 1;)
    {
        r = r * w + static_cast<double>(i) * coeffs[i];
    }
    return r;
}

bool PhasePolynomial::vanishes() const
{
    return std::all_of(coeffs.begin(), coeffs.end(), [](double c) { return c == 0.0; });
}

bool PhasePolynomial::is_cubic() const
{
    for (std::size_t i = 0; i < coeffs.size(); ++i)
    {
        if (i != 3 && coeffs[i] != 0.0)
        {
            return false;
        }
    }
    return cubic() != 0.0;
}

PhasePolynomial PhasePolynomial::negated() const
{
    PhasePolynomial p = *this;
    for (double& c : p.coeffs)
    {
        c = -c;
    }
    return p;
}

KernelStrategy resolve_strategy(const Potential& potential, KernelStrategy requested)
{
    if (requested != KernelStrategy::automatic)
    {
        return requested;
    }
    switch (potential.highest_odd_order())
    {
        case 0: return KernelStrategy::delta;
        case 3: return KernelStrategy::airy;
        default: return KernelStrategy::quadrature;
    }
}

double phase_series(double u, double w, const Potential& potential)
{
    return PhasePolynomial::at(u, potential)(w);
}

double airy_kernel(double y, double cubic)
{
    if (cubic == 0.0)
    {
        throw ValidationError("Airy kernel needs a nonzero cubic phase coefficient");
    }
    double scale = std::cbrt(3.0 * std::abs(cubic));
    return airy_ai(std::copysign(1.0, cubic) * y / scale) / scale;
}

QuadratureResult kernel_quadrature(double y, const PhasePolynomial& phase,
                                   const KernelSpec& spec, double tent_width)
{
    spec.validate();
    if (phase.vanishes())
    {
        throw ValidationError("kernel quadrature needs a nonvanishing phase");
    }
    GaussRule rule = gauss_legendre(spec.quadrature_points);
    double start = tail_start(y, phase);
    if (start > spec.w_cutoff)
    {
        throw NumericalError("kernel phase at y = " + fmt(y) + " stays slow up to w = " + fmt(start)
                                 + ", beyond w_cutoff = " + fmt(spec.w_cutoff),
                             start);
    }
    // damping only enters its polynomial regime once exp(-eta w^2) is flat
    // out to the start of the rotated tail
    double first_eta = std::min(spec.damping, 1.0 / (start * start));
    std::vector<double> etas;
    std::vector<std::vector<double>> table;
    QuadratureResult result;
    double prev = 0.0;
    for (int k = 0; k < spec.max_levels; ++k)
    {
        double eta = first_eta * std::pow(spec.damping_ratio, k);
        etas.push_back(eta);
        table.emplace_back();
        table[k].push_back(damped_integral(y, phase, eta, start, rule, tent_width));
        // Neville extrapolation to eta = 0 through the last few levels only;
        // strongly damped levels lie outside the polynomial regime
        int order = std::min(k, kNevilleOrder);
        for (int j = 1; j <= order; ++j)
        {
            double ratio = etas[k - j] / etas[k];
            table[k].push_back(table[k][j - 1]
                               + (table[k][j - 1] - table[k - 1][j - 1]) / (ratio - 1.0));
        }
        double cur = table[k][order];
        result.value = cur;
        result.levels = k + 1;
        if (k > 0)
        {
            result.residual = std::abs(cur - prev);
            if (result.residual < spec.tolerance)
            {
                return result;
            }
        }
        prev = cur;
    }
    throw NumericalError("kernel quadrature did not converge at y = " + fmt(y)
                             + ": residual " + fmt(result.residual) + " after "
                             + std::to_string(result.levels) + " damping levels",
                         result.residual);
}

double kernel_value(double y, double u, const Potential& potential, const KernelSpec& spec)
{
    KernelStrategy strategy = resolve_strategy(potential, spec.strategy);
    PhasePolynomial phase = PhasePolynomial::at(u, potential);
    switch (strategy)
    {
        case KernelStrategy::delta:
            throw ValidationError("delta kernels have no pointwise value; use kernel_row");
        case KernelStrategy::airy:
            if (!phase.is_cubic())
            {
                throw ValidationError("airy strategy needs a pure cubic phase at u = " + fmt(u));
            }
            return airy_kernel(y, phase.cubic());
        default: return kernel_quadrature(y, phase, spec).value;
    }
}

//---------------------------------------------------------------------------//
double DiscreteKernel::leakage() const
{
    return std::abs(1.0 - mass);
}

DiscreteKernel kernel_row(double u, const Potential& potential, std::span<const double> y_grid,
                          double spacing, const KernelSpec& spec)
{
    spec.validate();
    if (!(spacing > 0))
    {
        throw ValidationError("kernel_row spacing must be > 0");
    }
    if (y_grid.size() < 2)
    {
        throw ValidationError("kernel_row needs at least two grid points");
    }
    for (std::size_t j = 1; j < y_grid.size(); ++j)
    {
        if (std::abs(y_grid[j] - y_grid[j - 1] - spacing) > 1e-9 * std::max(1.0, spacing))
        {
            throw ValidationError("kernel_row y grid is not uniform with spacing " + fmt(spacing));
        }
    }

    DiscreteKernel row;
    row.strategy = resolve_strategy(potential, spec.strategy);
    PhasePolynomial phase = PhasePolynomial::at(u, potential);
    if (phase.vanishes())
    {
        row.strategy = KernelStrategy::delta;
    }

    const std::size_t n = y_grid.size();
    if (row.strategy == KernelStrategy::delta)
    {
        // Split unit mass linearly between the grid points bracketing y = 0
        double t = -y_grid[0] / spacing;
        double last = static_cast<double>(n - 1);
        if (t >= -1e-9 && t <= last + 1e-9)
        {
            t = std::clamp(t, 0.0, last);
            auto j = std::min(static_cast<std::size_t>(std::floor(t)), n - 2);
            double frac = t - static_cast<double>(j);
            row.offset = j;
            row.weights = {1.0 - frac, frac};
        }
    }
    else
    {
        if (row.strategy == KernelStrategy::airy && !phase.is_cubic())
        {
            throw ValidationError("airy strategy needs a pure cubic phase at u = " + fmt(u));
        }
        bool tent = spec.weighting == RowWeighting::tent;
        row.weights.resize(n);
        for (std::size_t j = 0; j < n; ++j)
        {
            double y = y_grid[j];
            if (row.strategy == KernelStrategy::airy)
            {
                row.weights[j] = tent ? airy_tent_weight(y, phase.cubic(), spacing)
                                      : airy_kernel(y, phase.cubic()) * spacing;
            }
            else
            {
                row.weights[j] = tent ? kernel_quadrature(y, phase, spec, spacing).value
                                      : kernel_quadrature(y, phase, spec).value * spacing;
            }
        }
    }
    row.mass = 0.0;
    for (double k : row.weights)
    {
        if (std::abs(k) > 1.0 + 1e-12)
        {
            throw NumericalError("kernel weight " + fmt(k) + " at u = " + fmt(u)
                                     + " exceeds 1 in magnitude; use a finer spatial spacing",
                                 k);
        }
        row.mass += k;
    }
    return row;
}

}  // namespace epsqmc
