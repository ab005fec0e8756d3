#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "rhedge/kernels.hpp"

namespace rhedge {

using Vec = std::vector<double>;

inline double dot(const Vec& a, const Vec& b) {
  return kernels::dot(a.data(), b.data(), a.size());
}

inline double norm_inf(const Vec& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

inline double norm2(const Vec& v) { return std::sqrt(dot(v, v)); }

inline void add_scaled(Vec& y, double alpha, const Vec& x) {
  kernels::axpy(alpha, x.data(), y.data(), y.size());
}

inline Vec scaled(const Vec& x, double alpha) {
  Vec y = x;
  for (double& v : y) v *= alpha;
  return y;
}

inline Vec vsum(const Vec& a, const Vec& b) {
  Vec y = a;
  add_scaled(y, 1.0, b);
  return y;
}

inline Vec vdiff(const Vec& a, const Vec& b) {
  Vec y = a;
  add_scaled(y, -1.0, b);
  return y;
}

struct DenseMatrix {
  std::size_t rows = 0, cols = 0;
  std::vector<double> a;

  DenseMatrix() = default;
  DenseMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), a(r * c, 0.0) {}

  double& at(std::size_t i, std::size_t j) { return a[i * cols + j]; }
  double at(std::size_t i, std::size_t j) const { return a[i * cols + j]; }
  double* row(std::size_t i) { return a.data() + i * cols; }
  const double* row(std::size_t i) const { return a.data() + i * cols; }
};

// Solves (A + damp*I) x = rhs for symmetric positive semidefinite A by
// Cholesky. Returns false if the damped matrix is still not positive
// definite (caller raises damping and retries).
inline bool solve_spd(DenseMatrix A, double damp, const Vec& rhs, Vec& x) {
  const std::size_t n = A.rows;
  if (A.cols != n || rhs.size() != n) throw std::invalid_argument("solve_spd: shape");
  for (std::size_t i = 0; i < n; ++i) A.at(i, i) += damp;
  // in-place LL^T
  for (std::size_t j = 0; j < n; ++j) {
    double d = A.at(j, j) - kernels::dot(A.row(j), A.row(j), j);
    if (d <= 0.0 || !std::isfinite(d)) return false;
    d = std::sqrt(d);
    A.at(j, j) = d;
    for (std::size_t i = j + 1; i < n; ++i) {
      A.at(i, j) = (A.at(i, j) - kernels::dot(A.row(i), A.row(j), j)) / d;
    }
  }
  x.assign(n, 0.0);
  // forward solve L y = rhs
  for (std::size_t i = 0; i < n; ++i)
    x[i] = (rhs[i] - kernels::dot(A.row(i), x.data(), i)) / A.at(i, i);
  // backward solve L^T x = y
  for (std::size_t ii = n; ii-- > 0;) {
    double s = x[ii];
    for (std::size_t k = ii + 1; k < n; ++k) s -= A.at(k, ii) * x[k];
    x[ii] = s / A.at(ii, ii);
  }
  return true;
}

// Deterministic RNG (splitmix64 core). Used for randomized fixtures and
// property suites; identical streams on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  int below(int n) { return static_cast<int>(next() % static_cast<std::uint64_t>(n)); }

 private:
  std::uint64_t state_;
};

}  // namespace rhedge
