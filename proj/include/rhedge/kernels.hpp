#pragma once

#include <cstddef>

// Arithmetic inner-loop kernels. Scalar reference implementations live in
// kernels::scalar; a SIMD variant (AVX2+FMA on x86-64, NEON on aarch64) is
// selected once at startup when the CPU supports it. The dispatched entry
// points below are what the rest of the library calls.
//
// The SIMD variants are equivalence-tested against the scalar references
// (tests/kernels_test.cpp); reductions use a fixed blocked order so results
// are reproducible run to run on the same machine.

namespace rhedge::kernels {

namespace scalar {
double dot(const double* a, const double* b, std::size_t n);
double dot3(const double* a, const double* b, const double* c, std::size_t n);
void   axpy(double alpha, const double* x, double* y, std::size_t n);
double max_value(const double* a, std::size_t n);
// out[j] = w[j] * exp(t[j] - shift) (w == nullptr means w[j] = 1); returns sum(out).
double exp_weighted(const double* t, const double* w, double shift, double* out, std::size_t n);
}  // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
namespace avx2 {
bool   available();
double dot(const double* a, const double* b, std::size_t n);
double dot3(const double* a, const double* b, const double* c, std::size_t n);
void   axpy(double alpha, const double* x, double* y, std::size_t n);
double max_value(const double* a, std::size_t n);
double exp_weighted(const double* t, const double* w, double shift, double* out, std::size_t n);
}  // namespace avx2
#endif

#if defined(__aarch64__)
namespace neon {
bool   available();
double dot(const double* a, const double* b, std::size_t n);
double dot3(const double* a, const double* b, const double* c, std::size_t n);
void   axpy(double alpha, const double* x, double* y, std::size_t n);
double max_value(const double* a, std::size_t n);
double exp_weighted(const double* t, const double* w, double shift, double* out, std::size_t n);
}  // namespace neon
#endif

// Dispatched entry points.
double dot(const double* a, const double* b, std::size_t n);
double dot3(const double* a, const double* b, const double* c, std::size_t n);
void   axpy(double alpha, const double* x, double* y, std::size_t n);
double max_value(const double* a, std::size_t n);
double exp_weighted(const double* t, const double* w, double shift, double* out, std::size_t n);

// Name of the backend in use: "avx2", "neon" or "scalar".
const char* active_backend();

}  // namespace rhedge::kernels
