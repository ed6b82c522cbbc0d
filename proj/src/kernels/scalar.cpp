#include "flowtopo/kernels.hpp"

#include <algorithm>

namespace flowtopo::kernels::scalar {

double dot(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

double nrm2sq(const double* a, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * a[i];
  return s;
}

double sum(const double* a, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i];
  return s;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void scale(double alpha, double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) x[i] *= alpha;
}

void clip(double lo, double hi, double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) x[i] = std::min(hi, std::max(lo, x[i]));
}

namespace {

// C^2 ramp: identity below lo, exactly 1 above hi. The connecting segment
// integrates 1 - smootherstep, so h' is C^1 and h'' vanishes at both knots.
// With hi - lo = 2(1 - lo) the ramp reaches exactly 1 at hi.
inline double ramp(double r, double lo, double hi) {
  if (r <= lo) return r;
  if (r >= hi) return 1.0;
  const double w = hi - lo;
  const double xi = (r - lo) / w;
  const double xi2 = xi * xi;
  const double s_int = ((xi - 3.0) * xi + 2.5) * xi2 * xi2;  // int_0^xi smootherstep
  return lo + (r - lo) - w * s_int;
}

inline double ramp_deriv(double r, double lo, double hi) {
  if (r <= lo) return 1.0;
  if (r >= hi) return 0.0;
  const double xi = (r - lo) / (hi - lo);
  const double s = ((6.0 * xi - 15.0) * xi + 10.0) * xi * xi * xi;
  return 1.0 - s;
}

}  // namespace

void alpha_eval(const AlphaParams& p, const double* phi, double* out, std::size_t n) {
  if (p.a0 <= 0.0 || p.abar <= 0.0) {
    std::fill(out, out + n, 0.0);
    return;
  }
  for (std::size_t i = 0; i < n; ++i) {
    const double ahat = p.a0 * std::max(0.0, 1.0 - phi[i]) / (1.0 + phi[i] + p.dsmooth);
    out[i] = p.abar * ramp(ahat / p.abar, p.blend_lo, p.blend_hi);
  }
}

void alpha_deriv(const AlphaParams& p, const double* phi, double* out, std::size_t n) {
  if (p.a0 <= 0.0 || p.abar <= 0.0) {
    std::fill(out, out + n, 0.0);
    return;
  }
  const double c = p.a0 * (2.0 + p.dsmooth);
  for (std::size_t i = 0; i < n; ++i) {
    const double den = 1.0 + phi[i] + p.dsmooth;
    const double ahat = p.a0 * (1.0 - phi[i]) / den;
    const double dahat = -c / (den * den);
    out[i] = ramp_deriv(ahat / p.abar, p.blend_lo, p.blend_hi) * dahat;
  }
}

void psi_eval(const double* phi, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = 0.5 * (1.0 - phi[i] * phi[i]);
}

}  // namespace flowtopo::kernels::scalar
