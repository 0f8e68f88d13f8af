// SPDX-License-Identifier: Apache-2.0
#include "epsqmc/airy.hpp"

#include <cmath>
#include <numbers>

namespace epsqmc
{
namespace
{

constexpr double kSeriesRadius = 8.0;
// Ai(0) and -Ai'(0)
constexpr long double kAi0 = 0.355028053887817239260063186004183176L;
constexpr long double kDAi0 = 0.258819403792806798405183560189203963L;

double maclaurin(double z)
{
    long double x = z;
    long double x3 = x * x * x;
    long double f = 1.0L, g = x;
    long double tf = 1.0L, tg = x;
    for (int k = 0; k < 200; ++k)
    {
        tf *= x3 / ((3.0L * k + 2.0L) * (3.0L * k + 3.0L));
        tg *= x3 / ((3.0L * k + 3.0L) * (3.0L * k + 4.0L));
        f += tf;
        g += tg;
        if (std::fabs(tf) < 1e-22L * std::fabs(f) && std::fabs(tg) < 1e-22L * (std::fabs(g) + 1e-300L))
        {
            break;
        }
    }
    return static_cast<double>(kAi0 * f - kDAi0 * g);
}

// u_k = Gamma(3k + 1/2) / (54^k k! Gamma(k + 1/2)) divided by zeta^k.
template<class Visit>
void asymptotic_terms(double zeta, Visit&& visit)
{
    double term = 1.0;
    double prev = 2.0;
    for (int k = 0; k < 60; ++k)
    {
        if (k > 0)
        {
            term *= (6.0 * k - 5.0) * (6.0 * k - 3.0) * (6.0 * k - 1.0)
                    / ((2.0 * k - 1.0) * 216.0 * k) / zeta;
        }
        if (std::fabs(term) > std::fabs(prev) || std::fabs(term) < 1e-18)
        {
            break;  // asymptotic series: stop at the smallest term
        }
        visit(k, term);
        prev = term;
    }
}

}  // namespace

double airy_ai(double z)
{
    if (std::fabs(z) <= kSeriesRadius)
    {
        return maclaurin(z);
    }
    constexpr double inv_sqrt_pi = std::numbers::inv_sqrtpi;
    if (z > 0)
    {
        double zeta = 2.0 / 3.0 * z * std::sqrt(z);
        double sum = 0.0;
        asymptotic_terms(zeta, [&](int k, double t) { sum += (k % 2 == 0) ? t : -t; });
        return 0.5 * inv_sqrt_pi * std::exp(-zeta) / std::pow(z, 0.25) * sum;
    }
    double x = -z;
    double zeta = 2.0 / 3.0 * x * std::sqrt(x);
    double even = 0.0, odd = 0.0;
    asymptotic_terms(zeta, [&](int k, double t) {
        // (-1)^(k/2) for even k, (-1)^((k-1)/2) for odd k
        double sign = ((k / 2) % 2 == 0) ? 1.0 : -1.0;
        (k % 2 == 0 ? even : odd) += sign * t;
    });
    double phase = zeta - 0.25 * std::numbers::pi;
    return inv_sqrt_pi / std::pow(x, 0.25) * (std::cos(phase) * even + std::sin(phase) * odd);
}

}  // namespace epsqmc
