#include "ufl/simd/kernels.hpp"

#include <cmath>

namespace ufl::simd::scalar {

double l1_dist(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += std::fabs(a[i] - b[i]);
  return s;
}

double sqdist(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

double dot(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

void max_inplace(double* acc, const double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    if (x[i] > acc[i]) acc[i] = x[i];
  }
}

}  // namespace ufl::simd::scalar
