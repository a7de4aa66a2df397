#include "ufl/simd/kernels.hpp"

#include <cstdlib>
#include <cstring>

namespace ufl::simd {

namespace {

bool cpu_has_avx2() {
#if (defined(__x86_64__) || defined(_M_X64)) && defined(__GNUC__)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Isa resolve_isa() {
  const char* env = std::getenv("UFL_SIMD");
  if (env != nullptr) {
    if (std::strcmp(env, "scalar") == 0) return Isa::scalar;
    if (std::strcmp(env, "avx2") == 0 && cpu_has_avx2()) return Isa::avx2;
    // "auto" or anything unrecognized falls through to detection.
  }
  return cpu_has_avx2() ? Isa::avx2 : Isa::scalar;
}

struct KernelTable {
  double (*l1_dist)(const double*, const double*, std::size_t);
  double (*sqdist)(const double*, const double*, std::size_t);
  double (*dot)(const double*, const double*, std::size_t);
  void (*max_inplace)(double*, const double*, std::size_t);
};

KernelTable make_table(Isa isa) {
#if defined(__x86_64__) || defined(_M_X64)
  if (isa == Isa::avx2) {
    return {avx2::l1_dist, avx2::sqdist, avx2::dot, avx2::max_inplace};
  }
#else
  (void)isa;
#endif
  return {scalar::l1_dist, scalar::sqdist, scalar::dot, scalar::max_inplace};
}

const Isa g_isa = resolve_isa();
const KernelTable g_kernels = make_table(g_isa);

}  // namespace

Isa active_isa() { return g_isa; }

const char* isa_name(Isa isa) {
  switch (isa) {
    case Isa::avx2: return "avx2";
    case Isa::scalar: return "scalar";
  }
  return "unknown";
}

double l1_dist(const double* a, const double* b, std::size_t n) {
  return g_kernels.l1_dist(a, b, n);
}

double sqdist(const double* a, const double* b, std::size_t n) {
  return g_kernels.sqdist(a, b, n);
}

double dot(const double* a, const double* b, std::size_t n) {
  return g_kernels.dot(a, b, n);
}

void max_inplace(double* acc, const double* x, std::size_t n) {
  g_kernels.max_inplace(acc, x, n);
}

void matvec(const double* m, const double* v, double* out,
            std::size_t rows, std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) {
    out[r] = g_kernels.dot(m + r * cols, v, cols);
  }
}

}  // namespace ufl::simd
