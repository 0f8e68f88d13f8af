// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <vector>

namespace epsqmc
{

/// Polynomial potential U(u) = sum_j c_j u^j in nondimensional units.
class Potential
{
  public:
    Potential() = default;
    explicit Potential(std::vector<double> coefficients);

    static Potential harmonic(double omega = 1.0) { return Potential({0.0, 0.0, 0.5 * omega * omega}); }

    const std::vector<double>& coefficients() const { return coeffs_; }
    // Degree after trimming trailing zeros; the zero polynomial has degree 0.
    int degree() const;

    double value(double u) const { return derivative(0, u); }
    double derivative(int order, double u) const;

    /// Highest odd derivative order >= 3 that is not identically zero, or 0.
    int highest_odd_order() const;

  private:
    std::vector<double> coeffs_;
};

/// One potential per slice, or a single shared potential.
class SlicePotentials
{
  public:
    SlicePotentials() = default;
    explicit SlicePotentials(Potential shared) : slices_{std::move(shared)} {}
    explicit SlicePotentials(std::vector<Potential> per_slice);

    // Potential acting at time slice l (the last one repeats if shared).
    const Potential& at(std::size_t slice) const;
    bool time_dependent() const { return slices_.size() > 1; }
    std::size_t size() const { return slices_.size(); }

  private:
    std::vector<Potential> slices_{Potential{}};
};

}  // namespace epsqmc
