// SPDX-License-Identifier: Apache-2.0
#include "epsqmc/potential.hpp"

#include <algorithm>
#include <cmath>

#include "epsqmc/error.hpp"

namespace epsqmc
{

Potential::Potential(std::vector<double> coefficients) : coeffs_(std::move(coefficients))
{
    for (double c : coeffs_)
    {
        if (!std::isfinite(c))
        {
            throw ValidationError("potential coefficients must be finite");
        }
    }
    while (!coeffs_.empty() && coeffs_.back() == 0.0)
    {
        coeffs_.pop_back();
    }
}

int Potential::degree() const
{
    return coeffs_.empty() ? 0 : static_cast<int>(coeffs_.size()) - 1;
}

double Potential::derivative(int order, double u) const
{
    if (order < 0)
    {
        throw ValidationError("derivative order must be >= 0");
    }
    double result = 0.0;
    // Horner over the differentiated coefficients j!/(j-order)! c_j
    for (int j = static_cast<int>(coeffs_.size()) - 1; j >= order; --j)
    {
        double falling = 1.0;
        for (int i = 0; i < order; ++i)
        {
            falling *= j - i;
        }
        result = result * u + falling * coeffs_[j];
    }
    return result;
}

int Potential::highest_odd_order() const
{
    int d = degree();
    int top = (d % 2 == 1) ? d : d - 1;
    return top >= 3 ? top : 0;
}

SlicePotentials::SlicePotentials(std::vector<Potential> per_slice)
    : slices_(std::move(per_slice))
{
    if (slices_.empty())
    {
        slices_.emplace_back();
    }
}

const Potential& SlicePotentials::at(std::size_t slice) const
{
    return slices_[std::min(slice, slices_.size() - 1)];
}

}  // namespace epsqmc
