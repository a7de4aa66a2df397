#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "ufl/simd/kernels.hpp"

namespace {

std::vector<double> random_vec(std::mt19937_64& rng, std::size_t n,
                               double lo = -3.0, double hi = 3.0) {
  std::uniform_real_distribution<double> dist(lo, hi);
  std::vector<double> v(n);
  for (auto& x : v) x = dist(rng);
  return v;
}

bool close(double a, double b, double tol) {
  return std::abs(a - b) <= tol * (1.0 + std::abs(a) + std::abs(b));
}

}  // namespace

TEST_CASE("scalar kernels match straightforward loops") {
  std::mt19937_64 rng(7);
  for (std::size_t n : {std::size_t{0}, std::size_t{1}, std::size_t{3},
                        std::size_t{8}, std::size_t{17}, std::size_t{121}}) {
    auto a = random_vec(rng, n);
    auto b = random_vec(rng, n);
    double l1 = 0.0, sq = 0.0, dp = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      l1 += std::abs(a[i] - b[i]);
      sq += (a[i] - b[i]) * (a[i] - b[i]);
      dp += a[i] * b[i];
    }
    CHECK(close(ufl::simd::scalar::l1_dist(a.data(), b.data(), n), l1, 1e-14));
    CHECK(close(ufl::simd::scalar::sqdist(a.data(), b.data(), n), sq, 1e-14));
    CHECK(close(ufl::simd::scalar::dot(a.data(), b.data(), n), dp, 1e-14));

    auto acc = random_vec(rng, n);
    auto acc2 = acc;
    ufl::simd::scalar::max_inplace(acc.data(), b.data(), n);
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(acc[i] == std::max(acc2[i], b[i]));
    }
  }
}

#if defined(__x86_64__) || defined(_M_X64)
TEST_CASE("avx2 kernels agree with scalar references") {
  if (!(__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma"))) {
    MESSAGE("cpu lacks avx2+fma; skipping vector-unit equivalence checks");
    return;
  }
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    // Lengths straddle the vector width, including remainders of every size.
    std::size_t n = static_cast<std::size_t>(rng() % 70);
    auto a = random_vec(rng, n);
    auto b = random_vec(rng, n);

    CHECK(close(ufl::simd::avx2::l1_dist(a.data(), b.data(), n),
                ufl::simd::scalar::l1_dist(a.data(), b.data(), n), 1e-12));
    CHECK(close(ufl::simd::avx2::sqdist(a.data(), b.data(), n),
                ufl::simd::scalar::sqdist(a.data(), b.data(), n), 1e-12));
    CHECK(close(ufl::simd::avx2::dot(a.data(), b.data(), n),
                ufl::simd::scalar::dot(a.data(), b.data(), n), 1e-12));

    auto acc1 = random_vec(rng, n);
    auto acc2 = acc1;
    ufl::simd::avx2::max_inplace(acc1.data(), b.data(), n);
    ufl::simd::scalar::max_inplace(acc2.data(), b.data(), n);
    for (std::size_t i = 0; i < n; ++i) CHECK(acc1[i] == acc2[i]);
  }
}
#endif

TEST_CASE("dispatched kernels agree with scalar references") {
  std::mt19937_64 rng(13);
  MESSAGE("active isa: ", ufl::simd::isa_name(ufl::simd::active_isa()));
  for (int trial = 0; trial < 20; ++trial) {
    std::size_t n = 1 + static_cast<std::size_t>(rng() % 128);
    auto a = random_vec(rng, n);
    auto b = random_vec(rng, n);
    CHECK(close(ufl::simd::l1_dist(a.data(), b.data(), n),
                ufl::simd::scalar::l1_dist(a.data(), b.data(), n), 1e-12));
    CHECK(close(ufl::simd::sqdist(a.data(), b.data(), n),
                ufl::simd::scalar::sqdist(a.data(), b.data(), n), 1e-12));
    CHECK(close(ufl::simd::dot(a.data(), b.data(), n),
                ufl::simd::scalar::dot(a.data(), b.data(), n), 1e-12));
  }
}

TEST_CASE("matvec multiplies row-major matrix by vector") {
  std::mt19937_64 rng(17);
  const std::size_t rows = 5, cols = 9;
  auto m = random_vec(rng, rows * cols);
  auto v = random_vec(rng, cols);
  std::vector<double> out(rows, 0.0);
  ufl::simd::matvec(m.data(), v.data(), out.data(), rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    double want = 0.0;
    for (std::size_t c = 0; c < cols; ++c) want += m[r * cols + c] * v[c];
    CHECK(close(out[r], want, 1e-12));
  }
}

TEST_CASE("isa_name strings") {
  CHECK(std::string(ufl::simd::isa_name(ufl::simd::Isa::scalar)) == "scalar");
  CHECK(std::string(ufl::simd::isa_name(ufl::simd::Isa::avx2)) == "avx2");
}
