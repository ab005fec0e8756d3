#include "rhedge/kernels.hpp"

#include <cmath>

namespace rhedge::kernels::scalar {

double dot(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

double dot3(const double* a, const double* b, const double* c, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i] * c[i];
  return s;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

double max_value(const double* a, std::size_t n) {
  double m = a[0];
  for (std::size_t i = 1; i < n; ++i)
    if (a[i] > m) m = a[i];
  return m;
}

double exp_weighted(const double* t, const double* w, double shift, double* out,
                    std::size_t n) {
  double s = 0.0;
  if (w) {
    for (std::size_t i = 0; i < n; ++i) {
      out[i] = w[i] * std::exp(t[i] - shift);
      s += out[i];
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      out[i] = std::exp(t[i] - shift);
      s += out[i];
    }
  }
  return s;
}

}  // namespace rhedge::kernels::scalar
