// NEON kernel variants for aarch64. exp_weighted stays on std::exp per lane;
// the win on this path is the fused multiply-add reductions.

#if defined(__aarch64__)

#include "rhedge/kernels.hpp"

#include <arm_neon.h>
#include <cmath>

namespace rhedge::kernels::neon {

bool available() { return true; }

double dot(const double* a, const double* b, std::size_t n) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2)
    acc = vfmaq_f64(acc, vld1q_f64(a + i), vld1q_f64(b + i));
  double s = vaddvq_f64(acc);
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

double dot3(const double* a, const double* b, const double* c, std::size_t n) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    float64x2_t ab = vmulq_f64(vld1q_f64(a + i), vld1q_f64(b + i));
    acc = vfmaq_f64(acc, ab, vld1q_f64(c + i));
  }
  double s = vaddvq_f64(acc);
  for (; i < n; ++i) s += a[i] * b[i] * c[i];
  return s;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(alpha);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2)
    vst1q_f64(y + i, vfmaq_f64(vld1q_f64(y + i), va, vld1q_f64(x + i)));
  for (; i < n; ++i) y[i] += alpha * x[i];
}

double max_value(const double* a, std::size_t n) {
  if (n < 2) return scalar::max_value(a, n);
  float64x2_t m = vld1q_f64(a);
  std::size_t i = 2;
  for (; i + 2 <= n; i += 2) m = vmaxq_f64(m, vld1q_f64(a + i));
  double s = vmaxvq_f64(m);
  for (; i < n; ++i)
    if (a[i] > s) s = a[i];
  return s;
}

double exp_weighted(const double* t, const double* w, double shift, double* out,
                    std::size_t n) {
  return scalar::exp_weighted(t, w, shift, out, n);
}

}  // namespace rhedge::kernels::neon

#endif  // aarch64
