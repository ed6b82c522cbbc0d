#pragma once

#include "flowtopo/kernels.hpp"

namespace flowtopo {

// Interpolation coefficient family alpha_eps coupling the Brinkman
// penalization to the interface width:
//
//   abar_eps      = a0 * eps^(-s),            0 < s < 2/3
//   ahat(phi)     = a0 (1 - phi) / (1 + phi + dsmooth)
//   alpha_eps(phi)= abar_eps * h(ahat(phi)/abar_eps)
//
// with the C^2 saturating ramp h from the kernels. alpha_eps is C^2,
// nonincreasing in phi, alpha_eps(1) = 0 exactly and alpha_eps(-1) = abar_eps
// exactly once ahat(-1) >= blend_hi * abar_eps. For fixed phi it is
// nondecreasing as eps decreases, and alpha_eps(0) <= a0/(1+dsmooth) stays
// bounded along the schedule. a0 == 0 selects alpha == 0 (plain Navier-Stokes).
struct AlphaSchedule {
  double a0 = 1.0;
  double s = 0.5;
  double dsmooth = 0.01;
  double blend_lo = 0.8;
  double blend_hi = 1.2;

  void validate() const;
  double abar(double eps) const;
  kernels::AlphaParams params(double eps) const;
  double alpha(double eps, double phi) const;
  double dalpha(double eps, double phi) const;
};

}  // namespace flowtopo
