// SPDX-License-Identifier: Apache-2.0
//---------------------------------------------------------------------------//
/*!
 * Real-valued short-time transition kernel
 *
 *   K(y, u) = (1/2pi) Int cos(y w + phi(w; u)) dw,
 *   phi(w; u) = 2 sum_{k>=1} w^(2k+1)/(2k+1)! U^(2k+1)(u),
 *
 * normalised so that Int K dy = 1. For polynomial U the phase is a finite
 * odd polynomial in w. It reduces to delta(y) when phi vanishes, to an Airy
 * profile when only the cubic term survives, and otherwise is evaluated by
 * Gaussian-damped quadrature extrapolated to zero damping.
 */
//---------------------------------------------------------------------------//
#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "epsqmc/potential.hpp"

namespace epsqmc
{

enum class KernelStrategy
{
    automatic,
    delta,
    airy,
    quadrature,
};

enum class RowWeighting
{
    point,  //!< k_j = K(y_j) * spacing
    tent,   //!< k_j = Int K(y) hat((y - y_j) / spacing) dy
};

const char* to_string(KernelStrategy s);
const char* to_string(RowWeighting w);
KernelStrategy parse_kernel_strategy(const std::string& name);
RowWeighting parse_row_weighting(const std::string& name);

struct KernelSpec
{
    KernelStrategy strategy = KernelStrategy::automatic;
    double damping = 0.5;         //!< first Gaussian damping eta
    double damping_ratio = 0.6;   //!< eta_{k+1} / eta_k
    int max_levels = 24;
    double tolerance = 1e-8;      //!< successive-extrapolant convergence
    double w_cutoff = 200.0;      //!< largest w at which the phase may still be slow
    int quadrature_points = 16;   //!< Gauss-Legendre nodes per panel
    RowWeighting weighting = RowWeighting::point;
    double tail_tolerance = 0.01; //!< allowed |1 - row mass| before warning

    void validate() const;
};

/// Odd polynomial phase: coefficient of w^p stored at index p.
struct PhasePolynomial
{
    std::vector<double> coeffs;

    static PhasePolynomial at(double u, const Potential& potential);

    double operator()(double w) const;
    double slope(double w) const;
    bool vanishes() const;
    // Only the w^3 term is present.
    bool is_cubic() const;
    double cubic() const { return coeffs.size() > 3 ? coeffs[3] : 0.0; }
    PhasePolynomial negated() const;
};

KernelStrategy resolve_strategy(const Potential& potential, KernelStrategy requested);

double phase_series(double u, double w, const Potential& potential);

/// Closed form for phase a w^3: (3|a|)^(-1/3) Ai(sign(a) y (3|a|)^(-1/3)).
double airy_kernel(double y, double cubic);

struct QuadratureResult
{
    double value = 0;
    double residual = 0;  //!< |difference of the last two extrapolants|
    int levels = 0;
};

// Damped quadrature with Richardson extrapolation in eta -> 0. When
// tent_width > 0 the integrand carries the Fourier transform of a unit tent
// of that half-width, yielding the tent-weighted row entry instead of K.
QuadratureResult kernel_quadrature(double y, const PhasePolynomial& phase,
                                   const KernelSpec& spec, double tent_width = 0.0);

double kernel_value(double y, double u, const Potential& potential, const KernelSpec& spec);

/// Row of kernel weights over a uniform y grid.
struct DiscreteKernel
{
    std::size_t offset = 0;        //!< grid index of weights[0]
    std::vector<double> weights;
    double mass = 0;
    KernelStrategy strategy = KernelStrategy::delta;

    double weight(std::size_t index) const
    {
        return index >= offset && index - offset < weights.size() ? weights[index - offset] : 0.0;
    }
    double leakage() const;
};

DiscreteKernel kernel_row(double u, const Potential& potential, std::span<const double> y_grid,
                          double spacing, const KernelSpec& spec);

}  // namespace epsqmc
