#include "flowtopo/kernels.hpp"

#include <cstdlib>
#include <cstring>
#include <stdexcept>

namespace flowtopo::kernels {

bool avx2_available() {
#if defined(FLOWTOPO_BUILD_AVX2) && (defined(__x86_64__) || defined(_M_X64))
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

namespace {

Isa detect() {
  if (const char* env = std::getenv("FLOWTOPO_SIMD")) {
    if (std::strcmp(env, "scalar") == 0) return Isa::scalar;
    if (std::strcmp(env, "avx2") == 0) {
      if (!avx2_available()) throw std::runtime_error("FLOWTOPO_SIMD=avx2 but AVX2 is unavailable");
      return Isa::avx2;
    }
    // anything else, including "auto", falls through to detection
  }
  return avx2_available() ? Isa::avx2 : Isa::scalar;
}

Isa g_isa = detect();

}  // namespace

Isa active_isa() { return g_isa; }

const char* isa_name(Isa isa) { return isa == Isa::avx2 ? "avx2" : "scalar"; }

void set_isa(Isa isa) {
  if (isa == Isa::avx2 && !avx2_available())
    throw std::runtime_error("AVX2 backend unavailable on this CPU/build");
  g_isa = isa;
}

#if defined(FLOWTOPO_BUILD_AVX2)
#define FLOWTOPO_DISPATCH(fn, ...) \
  return g_isa == Isa::avx2 ? avx2::fn(__VA_ARGS__) : scalar::fn(__VA_ARGS__)
#else
#define FLOWTOPO_DISPATCH(fn, ...) return scalar::fn(__VA_ARGS__)
#endif

double dot(const double* a, const double* b, std::size_t n) { FLOWTOPO_DISPATCH(dot, a, b, n); }
double nrm2sq(const double* a, std::size_t n) { FLOWTOPO_DISPATCH(nrm2sq, a, n); }
double sum(const double* a, std::size_t n) { FLOWTOPO_DISPATCH(sum, a, n); }
void axpy(double alpha, const double* x, double* y, std::size_t n) {
  FLOWTOPO_DISPATCH(axpy, alpha, x, y, n);
}
void scale(double alpha, double* x, std::size_t n) { FLOWTOPO_DISPATCH(scale, alpha, x, n); }
void clip(double lo, double hi, double* x, std::size_t n) { FLOWTOPO_DISPATCH(clip, lo, hi, x, n); }
void alpha_eval(const AlphaParams& p, const double* phi, double* out, std::size_t n) {
  FLOWTOPO_DISPATCH(alpha_eval, p, phi, out, n);
}
void alpha_deriv(const AlphaParams& p, const double* phi, double* out, std::size_t n) {
  FLOWTOPO_DISPATCH(alpha_deriv, p, phi, out, n);
}
void psi_eval(const double* phi, double* out, std::size_t n) {
  FLOWTOPO_DISPATCH(psi_eval, phi, out, n);
}

}  // namespace flowtopo::kernels
