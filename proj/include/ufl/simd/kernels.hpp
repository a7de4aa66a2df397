#pragma once

#include <cstddef>

// Data-parallel inner-loop kernels used by feature encoding and matching.
// Each kernel exists as a scalar reference implementation and, on x86-64,
// an AVX2/FMA variant. The active variant is picked once at startup from
// CPU features; UFL_SIMD=scalar|avx2|auto overrides the choice.
//
// The SIMD variants may reassociate sums, so they are equivalence-tested
// against the scalar references to tight relative tolerances rather than
// bit-exactly.

namespace ufl::simd {

enum class Isa { scalar, avx2 };

// Selected instruction set for this process.
Isa active_isa();
const char* isa_name(Isa isa);

// sum_i |a[i] - b[i]|
double l1_dist(const double* a, const double* b, std::size_t n);

// sum_i (a[i] - b[i])^2
double sqdist(const double* a, const double* b, std::size_t n);

// sum_i a[i] * b[i]
double dot(const double* a, const double* b, std::size_t n);

// acc[i] = max(acc[i], x[i])
void max_inplace(double* acc, const double* x, std::size_t n);

// out[r] = dot(m + r*cols, v, cols) for r in [0, rows)
void matvec(const double* m, const double* v, double* out,
            std::size_t rows, std::size_t cols);

namespace scalar {
double l1_dist(const double* a, const double* b, std::size_t n);
double sqdist(const double* a, const double* b, std::size_t n);
double dot(const double* a, const double* b, std::size_t n);
void max_inplace(double* acc, const double* x, std::size_t n);
}  // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
namespace avx2 {
// Callable only when the CPU reports AVX2+FMA support.
double l1_dist(const double* a, const double* b, std::size_t n);
double sqdist(const double* a, const double* b, std::size_t n);
double dot(const double* a, const double* b, std::size_t n);
void max_inplace(double* acc, const double* x, std::size_t n);
}  // namespace avx2
#endif

}  // namespace ufl::simd
