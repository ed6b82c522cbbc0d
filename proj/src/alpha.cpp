#include "flowtopo/alpha.hpp"

#include <cmath>
#include <stdexcept>

namespace flowtopo {

void AlphaSchedule::validate() const {
  if (a0 < 0.0) throw std::invalid_argument("alpha schedule: a0 must be >= 0");
  if (a0 > 0.0 && !(s > 0.0 && s < 2.0 / 3.0))
    throw std::invalid_argument("alpha schedule: exponent violates growth condition o(eps^{-2/3})");
  if (!(dsmooth > 0.0)) throw std::invalid_argument("alpha schedule: dsmooth must be positive");
  if (!(blend_lo > 0.0 && blend_hi > blend_lo))
    throw std::invalid_argument("alpha schedule: invalid blend window");
  // the ramp reaches exactly 1 at blend_hi only for this window
  if (std::abs(blend_lo + 0.5 * (blend_hi - blend_lo) - 1.0) > 1e-12)
    throw std::invalid_argument("alpha schedule: blend window must satisfy lo + (hi-lo)/2 = 1");
}

double AlphaSchedule::abar(double eps) const {
  if (a0 == 0.0) return 0.0;
  return a0 * std::pow(eps, -s);
}

kernels::AlphaParams AlphaSchedule::params(double eps) const {
  kernels::AlphaParams p;
  p.a0 = a0;
  p.dsmooth = dsmooth;
  p.abar = abar(eps);
  p.blend_lo = blend_lo;
  p.blend_hi = blend_hi;
  return p;
}

double AlphaSchedule::alpha(double eps, double phi) const {
  const auto p = params(eps);
  double out = 0.0;
  kernels::alpha_eval(p, &phi, &out, 1);
  return out;
}

double AlphaSchedule::dalpha(double eps, double phi) const {
  const auto p = params(eps);
  double out = 0.0;
  kernels::alpha_deriv(p, &phi, &out, 1);
  return out;
}

}  // namespace flowtopo
