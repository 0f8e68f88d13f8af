// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace epsqmc
{

/// Bad input: a precondition or configuration bound was violated.
class ValidationError : public std::invalid_argument
{
  public:
    using std::invalid_argument::invalid_argument;
};

/// A numerical diagnostic failed (non-convergence, |k| > 1, infeasible
/// variance, ...). Carries the measured quantity that tripped it.
class NumericalError : public std::runtime_error
{
  public:
    NumericalError(const std::string& what, double measured = 0.0)
        : std::runtime_error(what), measured_(measured)
    {
    }

    double measured() const noexcept { return measured_; }

  private:
    double measured_;
};

}  // namespace epsqmc
