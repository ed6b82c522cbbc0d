#include "flowtopo/kernels.hpp"

#if defined(FLOWTOPO_BUILD_AVX2) && defined(__AVX2__)

#include <immintrin.h>

#include <algorithm>

namespace flowtopo::kernels::avx2 {

namespace {

inline double hsum(__m256d v) {
  // Fixed combination order: (v0 + v2) + (v1 + v3).
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

}  // namespace

double dot(const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc);
  }
  double s = hsum(acc);
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

double nrm2sq(const double* a, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d v = _mm256_loadu_pd(a + i);
    acc = _mm256_fmadd_pd(v, v, acc);
  }
  double s = hsum(acc);
  for (; i < n; ++i) s += a[i] * a[i];
  return s;
}

double sum(const double* a, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(a + i));
  double s = hsum(acc);
  for (; i < n; ++i) s += a[i];
  return s;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d vy = _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i));
    _mm256_storeu_pd(y + i, vy);
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void scale(double alpha, double* x, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(x + i, _mm256_mul_pd(va, _mm256_loadu_pd(x + i)));
  }
  for (; i < n; ++i) x[i] *= alpha;
}

void clip(double lo, double hi, double* x, std::size_t n) {
  const __m256d vlo = _mm256_set1_pd(lo);
  const __m256d vhi = _mm256_set1_pd(hi);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(x + i, _mm256_min_pd(vhi, _mm256_max_pd(vlo, _mm256_loadu_pd(x + i))));
  }
  for (; i < n; ++i) x[i] = std::min(hi, std::max(lo, x[i]));
}

namespace {

// Vector ramp; the three branches of the scalar reference are realized with
// blends so all lanes follow the same instruction stream.
inline __m256d ramp(__m256d r, __m256d lo, __m256d hi, __m256d w, __m256d invw) {
  const __m256d xi_raw = _mm256_mul_pd(_mm256_sub_pd(r, lo), invw);
  const __m256d xi = _mm256_min_pd(_mm256_set1_pd(1.0), _mm256_max_pd(_mm256_setzero_pd(), xi_raw));
  const __m256d xi2 = _mm256_mul_pd(xi, xi);
  const __m256d xi4 = _mm256_mul_pd(xi2, xi2);
  // ((xi - 3) xi + 2.5) xi^4
  __m256d poly = _mm256_add_pd(_mm256_mul_pd(_mm256_sub_pd(xi, _mm256_set1_pd(3.0)), xi),
                               _mm256_set1_pd(2.5));
  poly = _mm256_mul_pd(poly, xi4);
  __m256d h = _mm256_sub_pd(r, _mm256_mul_pd(w, poly));
  h = _mm256_blendv_pd(h, r, _mm256_cmp_pd(r, lo, _CMP_LE_OQ));
  h = _mm256_blendv_pd(h, _mm256_set1_pd(1.0), _mm256_cmp_pd(r, hi, _CMP_GE_OQ));
  return h;
}

inline __m256d ramp_deriv(__m256d r, __m256d lo, __m256d hi, __m256d invw) {
  const __m256d xi_raw = _mm256_mul_pd(_mm256_sub_pd(r, lo), invw);
  const __m256d xi = _mm256_min_pd(_mm256_set1_pd(1.0), _mm256_max_pd(_mm256_setzero_pd(), xi_raw));
  const __m256d xi3 = _mm256_mul_pd(_mm256_mul_pd(xi, xi), xi);
  __m256d s = _mm256_add_pd(_mm256_mul_pd(_mm256_sub_pd(_mm256_mul_pd(_mm256_set1_pd(6.0), xi),
                                                        _mm256_set1_pd(15.0)),
                                          xi),
                            _mm256_set1_pd(10.0));
  s = _mm256_mul_pd(s, xi3);
  __m256d d = _mm256_sub_pd(_mm256_set1_pd(1.0), s);
  d = _mm256_blendv_pd(d, _mm256_set1_pd(1.0), _mm256_cmp_pd(r, lo, _CMP_LE_OQ));
  d = _mm256_blendv_pd(d, _mm256_setzero_pd(), _mm256_cmp_pd(r, hi, _CMP_GE_OQ));
  return d;
}

}  // namespace

void alpha_eval(const AlphaParams& p, const double* phi, double* out, std::size_t n) {
  if (p.a0 <= 0.0 || p.abar <= 0.0) {
    std::fill(out, out + n, 0.0);
    return;
  }
  const __m256d a0 = _mm256_set1_pd(p.a0);
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d oned = _mm256_set1_pd(1.0 + p.dsmooth);
  const __m256d abar = _mm256_set1_pd(p.abar);
  const __m256d invabar = _mm256_set1_pd(1.0 / p.abar);
  const __m256d lo = _mm256_set1_pd(p.blend_lo);
  const __m256d hi = _mm256_set1_pd(p.blend_hi);
  const __m256d w = _mm256_set1_pd(p.blend_hi - p.blend_lo);
  const __m256d invw = _mm256_set1_pd(1.0 / (p.blend_hi - p.blend_lo));
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d ph = _mm256_loadu_pd(phi + i);
    const __m256d num = _mm256_max_pd(_mm256_setzero_pd(), _mm256_sub_pd(one, ph));
    const __m256d ahat = _mm256_div_pd(_mm256_mul_pd(a0, num), _mm256_add_pd(ph, oned));
    const __m256d r = _mm256_mul_pd(ahat, invabar);
    _mm256_storeu_pd(out + i, _mm256_mul_pd(abar, ramp(r, lo, hi, w, invw)));
  }
  if (i < n) scalar::alpha_eval(p, phi + i, out + i, n - i);
}

void alpha_deriv(const AlphaParams& p, const double* phi, double* out, std::size_t n) {
  if (p.a0 <= 0.0 || p.abar <= 0.0) {
    std::fill(out, out + n, 0.0);
    return;
  }
  const __m256d a0 = _mm256_set1_pd(p.a0);
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d oned = _mm256_set1_pd(1.0 + p.dsmooth);
  const __m256d c = _mm256_set1_pd(-p.a0 * (2.0 + p.dsmooth));
  const __m256d invabar = _mm256_set1_pd(1.0 / p.abar);
  const __m256d lo = _mm256_set1_pd(p.blend_lo);
  const __m256d hi = _mm256_set1_pd(p.blend_hi);
  const __m256d invw = _mm256_set1_pd(1.0 / (p.blend_hi - p.blend_lo));
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d ph = _mm256_loadu_pd(phi + i);
    const __m256d den = _mm256_add_pd(ph, oned);
    const __m256d ahat = _mm256_div_pd(_mm256_mul_pd(a0, _mm256_sub_pd(one, ph)), den);
    const __m256d dahat = _mm256_div_pd(c, _mm256_mul_pd(den, den));
    const __m256d r = _mm256_mul_pd(ahat, invabar);
    _mm256_storeu_pd(out + i, _mm256_mul_pd(ramp_deriv(r, lo, hi, invw), dahat));
  }
  if (i < n) scalar::alpha_deriv(p, phi + i, out + i, n - i);
}

void psi_eval(const double* phi, double* out, std::size_t n) {
  const __m256d half = _mm256_set1_pd(0.5);
  const __m256d one = _mm256_set1_pd(1.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d ph = _mm256_loadu_pd(phi + i);
    _mm256_storeu_pd(out + i,
                     _mm256_mul_pd(half, _mm256_sub_pd(one, _mm256_mul_pd(ph, ph))));
  }
  for (; i < n; ++i) out[i] = 0.5 * (1.0 - phi[i] * phi[i]);
}

}  // namespace flowtopo::kernels::avx2

#endif  // FLOWTOPO_BUILD_AVX2 && __AVX2__
