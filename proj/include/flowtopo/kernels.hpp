#pragma once

#include <cstddef>
#include <string>

// Runtime-dispatched arithmetic kernels for the flat inner loops: coefficient
// vector algebra and batched evaluation of the capped interpolation function
// alpha and the double-obstacle potential psi at quadrature points.
//
// Every kernel has a scalar reference implementation; on x86-64 an AVX2+FMA
// variant is selected at startup when the CPU supports it. The environment
// variable FLOWTOPO_SIMD=scalar|avx2|auto overrides the choice. Reductions use
// a fixed lane/tail split per ISA, so results are reproducible run-to-run on
// the same machine for either backend.

namespace flowtopo::kernels {

enum class Isa { scalar, avx2 };

Isa active_isa();
const char* isa_name(Isa isa);
// Forces a backend (used by equivalence tests). Throws if unavailable.
void set_isa(Isa isa);

// Parameters of alpha_eps(phi) = abar * h(ahat(phi)/abar) where
// ahat(phi) = a0 (1 - phi) / (1 + phi + dsmooth) and h is a C^2 ramp that is
// the identity below blend_lo and saturates exactly at 1 above blend_hi.
struct AlphaParams {
  double a0 = 1.0;
  double dsmooth = 0.01;
  double abar = 1.0;
  double blend_lo = 0.8;
  double blend_hi = 1.2;
};

double dot(const double* a, const double* b, std::size_t n);
double nrm2sq(const double* a, std::size_t n);
double sum(const double* a, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void scale(double alpha, double* x, std::size_t n);
void clip(double lo, double hi, double* x, std::size_t n);

void alpha_eval(const AlphaParams& p, const double* phi, double* out, std::size_t n);
void alpha_deriv(const AlphaParams& p, const double* phi, double* out, std::size_t n);
// psi(phi) = (1 - phi^2)/2 (callers guarantee |phi| <= 1).
void psi_eval(const double* phi, double* out, std::size_t n);

namespace scalar {
double dot(const double* a, const double* b, std::size_t n);
double nrm2sq(const double* a, std::size_t n);
double sum(const double* a, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void scale(double alpha, double* x, std::size_t n);
void clip(double lo, double hi, double* x, std::size_t n);
void alpha_eval(const AlphaParams& p, const double* phi, double* out, std::size_t n);
void alpha_deriv(const AlphaParams& p, const double* phi, double* out, std::size_t n);
void psi_eval(const double* phi, double* out, std::size_t n);
}  // namespace scalar

bool avx2_available();

namespace avx2 {
double dot(const double* a, const double* b, std::size_t n);
double nrm2sq(const double* a, std::size_t n);
double sum(const double* a, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void scale(double alpha, double* x, std::size_t n);
void clip(double lo, double hi, double* x, std::size_t n);
void alpha_eval(const AlphaParams& p, const double* phi, double* out, std::size_t n);
void alpha_deriv(const AlphaParams& p, const double* phi, double* out, std::size_t n);
void psi_eval(const double* phi, double* out, std::size_t n);
}  // namespace avx2

}  // namespace flowtopo::kernels
