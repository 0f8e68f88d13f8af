// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "epsqmc/kernels.hpp"
#include "epsqmc/potential.hpp"

namespace epsqmc
{

using Complex = std::complex<double>;

/// Spatiotemporal grid. Positions and the potential are nondimensional:
/// x -> x / sqrt(hbar eps / m), U -> U eps / hbar.
struct LatticeSpec
{
    int n_slices = 2;
    double epsilon = 1.0;
    double mass = 1.0;
    double hbar = 1.0;
    double u_min = -1.0;
    double u_max = 1.0;
    int n_points = 3;

    void validate() const;
    void validate_units() const;
    double spacing() const { return (u_max - u_min) / (n_points - 1); }
    double point(std::size_t i) const { return u_min + static_cast<double>(i) * spacing(); }
    std::vector<double> grid() const;
    /// Physical length of one nondimensional unit.
    double length_scale() const;
};

double nondimensional_position(double x, const LatticeSpec& spec);
double nondimensional_energy(double energy, const LatticeSpec& spec);
/// Rescale a physical polynomial U(x) into U_ndim(u).
Potential nondimensionalize(const Potential& physical, const LatticeSpec& spec);

/// u_{l+1} = 2 u_l - u_{l-1} - U'(u_l) + y
double langevin_step(double u_now, double u_prev, double y, const Potential& potential);
/// Inverse of langevin_step in y.
double noise_for_target(double u_target, double u_now, double u_prev, const Potential& potential);

//---------------------------------------------------------------------------//
// Initial states sampled on the grid, normalised so sum |psi|^2 du = 1.
std::vector<Complex> gaussian_state(const LatticeSpec& spec, double center, double width,
                                    double momentum);
std::vector<Complex> oscillator_state(const LatticeSpec& spec, int n, double omega = 1.0,
                                      double center = 0.0);
double discrete_norm(std::span<const Complex> psi, double spacing);

//---------------------------------------------------------------------------//
/*!
 * Initial quasiprobability W(u0, u1 - u0) on grid pairs, including the
 * slice-zero potential phase, and the EPS initial-state probability
 * lambda = v + c W du^2 with c chosen so that lambda stays in [0, 1].
 */
class WignerTable
{
  public:
    WignerTable() = default;
    WignerTable(std::size_t n_points, double spacing, std::vector<double> values, double v);

    std::size_t size() const { return n_; }
    double spacing() const { return du_; }
    double value(std::size_t i0, std::size_t i1) const { return values_[i0 * n_ + i1]; }
    /// W du^2: the per-path initial weight.
    double weight(std::size_t i0, std::size_t i1) const { return value(i0, i1) * du_ * du_; }
    double lambda(std::size_t i0, std::size_t i1) const { return v_ + c_ * weight(i0, i1); }
    double scale() const { return c_; }
    double reference() const { return v_; }
    double total() const { return total_; }
    double imaginary_residue() const { return imag_residue_; }
    void set_imaginary_residue(double r) { imag_residue_ = r; }
    const std::vector<double>& values() const { return values_; }

  private:
    std::size_t n_ = 0;
    double du_ = 0;
    std::vector<double> values_;
    double v_ = 0.5;
    double c_ = 0;
    double total_ = 0;
    double imag_residue_ = 0;
};

WignerTable wigner_init(std::span<const Complex> psi0, const Potential& potential,
                        const LatticeSpec& spec, double v, unsigned workers = 1);

//---------------------------------------------------------------------------//
/*!
 * Kernel weights k(c | a, b) for the step (u_a, u_b) -> u_c at every chained
 * slice. The noise for a successor is y = (c + a - 2b) du + U'(u_b), so each
 * b needs a single kernel row over 4N - 3 noise values; pair rows are
 * windows into it.
 */
class TransitionTable
{
  public:
    TransitionTable(const LatticeSpec& spec, const SlicePotentials& potentials,
                    const KernelSpec& kernel, unsigned workers = 1);

    std::size_t size() const { return n_; }
    int chained_steps() const { return steps_; }

    /// Weight for the step at slice l in [1, n-1].
    double weight(int slice, std::size_t a, std::size_t b, std::size_t c) const
    {
        return line(slice, b).weight(c + a + 2 * (n_ - 1) - 2 * b);
    }
    const DiscreteKernel& line(int slice, std::size_t b) const
    {
        return lines_[set_index(slice) * n_ + b];
    }
    double row_mass(int slice, std::size_t a, std::size_t b) const;
    double row_abs_mass(int slice, std::size_t a, std::size_t b) const;

    struct Diagnostics
    {
        double max_abs_weight = 0;
        double min_weight = 0;
        double max_leakage = 0;
        double mean_leakage = 0;
        double max_row_abs_mass = 0;
        std::vector<std::string> strategies;
        std::vector<std::string> warnings;
    };
    const Diagnostics& diagnostics() const { return diag_; }

    /// Throws ValidationError unless v suits every weight (g = 1 - k).
    void check_reference(double v) const;

  private:
    std::size_t set_index(int slice) const { return time_dependent_ ? slice - 1 : 0; }
    double window_sum(const std::vector<double>& prefix, std::size_t a, std::size_t b) const;

    std::size_t n_ = 0;
    int steps_ = 0;
    bool time_dependent_ = false;
    std::vector<DiscreteKernel> lines_;
    std::vector<std::vector<double>> prefix_;      // per line, cumulative weights
    std::vector<std::vector<double>> abs_prefix_;  // per line, cumulative |weights|
    Diagnostics diag_;
};

}  // namespace epsqmc
