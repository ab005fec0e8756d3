#include "rhedge/kernels.hpp"

namespace rhedge::kernels {

namespace {

struct Backend {
  double (*dot)(const double*, const double*, std::size_t);
  double (*dot3)(const double*, const double*, const double*, std::size_t);
  void (*axpy)(double, const double*, double*, std::size_t);
  double (*max_value)(const double*, std::size_t);
  double (*exp_weighted)(const double*, const double*, double, double*, std::size_t);
  const char* name;
};

Backend pick() {
#if defined(__x86_64__) || defined(_M_X64)
  if (avx2::available())
    return {avx2::dot, avx2::dot3, avx2::axpy, avx2::max_value, avx2::exp_weighted,
            "avx2"};
#endif
#if defined(__aarch64__)
  if (neon::available())
    return {neon::dot, neon::dot3, neon::axpy, neon::max_value, neon::exp_weighted,
            "neon"};
#endif
  return {scalar::dot, scalar::dot3, scalar::axpy, scalar::max_value,
          scalar::exp_weighted, "scalar"};
}

const Backend& backend() {
  static const Backend b = pick();
  return b;
}

}  // namespace

double dot(const double* a, const double* b, std::size_t n) {
  return backend().dot(a, b, n);
}
double dot3(const double* a, const double* b, const double* c, std::size_t n) {
  return backend().dot3(a, b, c, n);
}
void axpy(double alpha, const double* x, double* y, std::size_t n) {
  backend().axpy(alpha, x, y, n);
}
double max_value(const double* a, std::size_t n) { return backend().max_value(a, n); }
double exp_weighted(const double* t, const double* w, double shift, double* out,
                    std::size_t n) {
  return backend().exp_weighted(t, w, shift, out, n);
}
const char* active_backend() { return backend().name; }

}  // namespace rhedge::kernels
