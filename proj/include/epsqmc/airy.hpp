// SPDX-License-Identifier: Apache-2.0
#pragma once

namespace epsqmc
{

// Airy function of the first kind. Maclaurin series (extended precision)
// for |z| <= 8, Poincare asymptotic expansions outside.
double airy_ai(double z);

}  // namespace epsqmc
