// AVX2 + FMA kernel variants. This translation unit is compiled with
// -mavx2 -mfma; callers must check avx2::available() before use (the
// dispatcher in kernels_dispatch.cpp does).

#if defined(__x86_64__) || defined(_M_X64)

#include "rhedge/kernels.hpp"

#include <cmath>
#include <immintrin.h>

namespace rhedge::kernels::avx2 {

bool available() {
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
}

namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d swap = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, swap));
}

inline double hmax(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_max_pd(lo, hi);
  __m128d swap = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_max_sd(lo, swap));
}

// Vectorized exp, Cephes-style: exp(x) = 2^n * (1 + 2 P(r)/(Q(r) - P(r))),
// r = x - n log 2 reduced to [-log2/2, log2/2]. Accuracy ~1-2 ulp, enough
// for the 1e-13 equivalence bound against std::exp checked in the tests.
inline __m256d exp_pd(__m256d x) {
  const __m256d log2e  = _mm256_set1_pd(1.4426950408889634073599);
  const __m256d c1     = _mm256_set1_pd(6.93145751953125e-1);
  const __m256d c2     = _mm256_set1_pd(1.42860682030941723212e-6);
  const __m256d p0     = _mm256_set1_pd(1.26177193074810590878e-4);
  const __m256d p1     = _mm256_set1_pd(3.02994407707441961300e-2);
  const __m256d p2     = _mm256_set1_pd(9.99999999999999999910e-1);
  const __m256d q0     = _mm256_set1_pd(3.00198505138664455042e-6);
  const __m256d q1     = _mm256_set1_pd(2.52448340349684104192e-3);
  const __m256d q2     = _mm256_set1_pd(2.27265548208155028766e-1);
  const __m256d q3     = _mm256_set1_pd(2.00000000000000000005e0);
  const __m256d hi_cut = _mm256_set1_pd(709.782712893383996843);
  const __m256d lo_cut = _mm256_set1_pd(-708.396418532264106224);

  __m256d xc = _mm256_min_pd(_mm256_max_pd(x, lo_cut), hi_cut);
  __m256d nf = _mm256_floor_pd(_mm256_fmadd_pd(log2e, xc, _mm256_set1_pd(0.5)));
  __m128i n32 = _mm256_cvttpd_epi32(nf);
  __m256d r = _mm256_fnmadd_pd(nf, c1, xc);
  r = _mm256_fnmadd_pd(nf, c2, r);
  __m256d rr = _mm256_mul_pd(r, r);
  __m256d P = _mm256_fmadd_pd(p0, rr, p1);
  P = _mm256_fmadd_pd(P, rr, p2);
  P = _mm256_mul_pd(P, r);
  __m256d Q = _mm256_fmadd_pd(q0, rr, q1);
  Q = _mm256_fmadd_pd(Q, rr, q2);
  Q = _mm256_fmadd_pd(Q, rr, q3);
  __m256d e = _mm256_div_pd(P, _mm256_sub_pd(Q, P));
  e = _mm256_fmadd_pd(_mm256_set1_pd(2.0), e, _mm256_set1_pd(1.0));

  __m256i n64 = _mm256_cvtepi32_epi64(n32);
  __m256i pow2 = _mm256_slli_epi64(_mm256_add_epi64(n64, _mm256_set1_epi64x(1023)), 52);
  e = _mm256_mul_pd(e, _mm256_castsi256_pd(pow2));

  // inputs below the cutoff underflow to exactly zero
  __m256d uf = _mm256_cmp_pd(x, lo_cut, _CMP_LT_OQ);
  return _mm256_andnot_pd(uf, e);
}

}  // namespace

double dot(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4)
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

double dot3(const double* a, const double* b, const double* c, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d ab = _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    acc = _mm256_fmadd_pd(ab, _mm256_loadu_pd(c + i), acc);
  }
  double s = hsum(acc);
  for (; i < n; ++i) s += a[i] * b[i] * c[i];
  return s;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d vy = _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i));
    _mm256_storeu_pd(y + i, vy);
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

double max_value(const double* a, std::size_t n) {
  if (n < 4) return scalar::max_value(a, n);
  __m256d m = _mm256_loadu_pd(a);
  std::size_t i = 4;
  for (; i + 4 <= n; i += 4) m = _mm256_max_pd(m, _mm256_loadu_pd(a + i));
  double s = hmax(m);
  for (; i < n; ++i)
    if (a[i] > s) s = a[i];
  return s;
}

double exp_weighted(const double* t, const double* w, double shift, double* out,
                    std::size_t n) {
  const __m256d vshift = _mm256_set1_pd(shift);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d e = exp_pd(_mm256_sub_pd(_mm256_loadu_pd(t + i), vshift));
    if (w) e = _mm256_mul_pd(e, _mm256_loadu_pd(w + i));
    _mm256_storeu_pd(out + i, e);
    acc = _mm256_add_pd(acc, e);
  }
  double s = hsum(acc);
  for (; i < n; ++i) {
    out[i] = (w ? w[i] : 1.0) * std::exp(t[i] - shift);
    s += out[i];
  }
  return s;
}

}  // namespace rhedge::kernels::avx2

#endif  // x86-64
