#include "oracle.hpp"

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>

namespace oracle {

namespace {

double abs_diff_sum(const double* a, const double* b, int n) {
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += std::fabs(a[i] - b[i]);
  return s;
}

// Solves the normal equations G^T G a = G^T x by Gaussian elimination with
// partial pivoting; near-zero pivots leave that coefficient at zero (any
// least-squares minimizer yields the same residual).
std::vector<double> least_squares(const std::vector<double>& gram,
                                  const std::vector<double>& rhs, int k) {
  std::vector<double> a(gram);
  std::vector<double> b(rhs);
  std::vector<int> order(k);
  for (int i = 0; i < k; ++i) order[i] = i;

  for (int col = 0; col < k; ++col) {
    int pivot = col;
    for (int r = col + 1; r < k; ++r) {
      if (std::fabs(a[r * k + col]) > std::fabs(a[pivot * k + col])) pivot = r;
    }
    for (int c = 0; c < k; ++c) std::swap(a[col * k + c], a[pivot * k + c]);
    std::swap(b[col], b[pivot]);
    const double p = a[col * k + col];
    if (std::fabs(p) < 1e-12) {
      for (int c = 0; c < k; ++c) a[col * k + c] = 0.0;
      b[col] = 0.0;
      continue;
    }
    for (int r = col + 1; r < k; ++r) {
      const double f = a[r * k + col] / p;
      for (int c = col; c < k; ++c) a[r * k + c] -= f * a[col * k + c];
      b[r] -= f * b[col];
    }
  }
  std::vector<double> x(k, 0.0);
  for (int r = k - 1; r >= 0; --r) {
    const double p = a[r * k + r];
    if (std::fabs(p) < 1e-12) continue;
    double s = b[r];
    for (int c = r + 1; c < k; ++c) s -= a[r * k + c] * x[c];
    x[r] = s / p;
  }
  return x;
}

}  // namespace

double labeling_energy(const ufl::MrfProblem& problem, const std::vector<int>& labels,
                       double alpha, double gamma) {
  const int u_count = problem.domain.u_count();
  double e = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) e += problem.data[i][labels[i]];
  for (const auto& [a, b] : problem.edges) {
    const int du = std::abs(labels[a] % u_count - labels[b] % u_count);
    const int dv = std::abs(labels[a] / u_count - labels[b] / u_count);
    const double v = du + dv;
    e += alpha * (v < gamma ? v : gamma);
  }
  return e;
}

std::pair<std::vector<int>, double> brute_force_labeling(const ufl::MrfProblem& problem,
                                                         double alpha, double gamma) {
  const int n = static_cast<int>(problem.data.size());
  const int labels = problem.domain.size();
  double combos = 1.0;
  for (int i = 0; i < n; ++i) {
    combos *= labels;
    if (combos > 1e6) throw std::runtime_error("brute force instance too large");
  }

  std::vector<int> current(n, 0);
  std::vector<int> best;
  double best_energy = std::numeric_limits<double>::infinity();
  while (true) {
    const double e = oracle::labeling_energy(problem, current, alpha, gamma);
    if (e < best_energy) {
      best_energy = e;
      best = current;
    }
    // Lexicographic increment: the last node varies fastest, so the first
    // labeling reaching the minimum is the lexicographically smallest.
    int pos = n - 1;
    while (pos >= 0 && current[pos] == labels - 1) {
      current[pos] = 0;
      --pos;
    }
    if (pos < 0) break;
    ++current[pos];
  }
  return {best, best_energy};
}

std::vector<double> naive_min_convolution(const std::vector<double>& h, int u_count, int v_count,
                                          double alpha, double gamma) {
  const int total = u_count * v_count;
  std::vector<double> out(total);
  for (int t = 0; t < total; ++t) {
    const int tu = t % u_count;
    const int tv = t / u_count;
    double best = std::numeric_limits<double>::infinity();
    for (int s = 0; s < total; ++s) {
      const int su = s % u_count;
      const int sv = s / u_count;
      const double d = std::abs(tu - su) + std::abs(tv - sv);
      const double cost = h[s] + alpha * (d < gamma ? d : gamma);
      if (cost < best) best = cost;
    }
    out[t] = best;
  }
  return out;
}

double exhaustive_omp_bound(const double* codewords, int M, int n, const double* x, int k) {
  double supports = 1.0;  // C(M, k)
  for (int i = 0; i < k; ++i) supports = supports * (M - i) / (i + 1);
  if (supports > 1e5) throw std::runtime_error("too many supports to enumerate");

  std::vector<int> pick(k);
  for (int i = 0; i < k; ++i) pick[i] = i;
  double best = std::numeric_limits<double>::infinity();

  while (true) {
    std::vector<double> gram(static_cast<std::size_t>(k) * k);
    std::vector<double> rhs(k);
    for (int a = 0; a < k; ++a) {
      const double* da = codewords + static_cast<std::size_t>(pick[a]) * n;
      for (int b = 0; b < k; ++b) {
        const double* db = codewords + static_cast<std::size_t>(pick[b]) * n;
        double s = 0.0;
        for (int i = 0; i < n; ++i) s += da[i] * db[i];
        gram[static_cast<std::size_t>(a) * k + b] = s;
      }
      double s = 0.0;
      for (int i = 0; i < n; ++i) s += da[i] * x[i];
      rhs[a] = s;
    }
    const std::vector<double> coef = least_squares(gram, rhs, k);
    double res2 = 0.0;
    for (int i = 0; i < n; ++i) {
      double r = x[i];
      for (int a = 0; a < k; ++a) r -= coef[a] * codewords[static_cast<std::size_t>(pick[a]) * n + i];
      res2 += r * r;
    }
    if (res2 < best) best = res2;

    int pos = k - 1;
    while (pos >= 0 && pick[pos] == M - k + pos) --pos;
    if (pos < 0) break;
    ++pick[pos];
    for (int i = pos + 1; i < k; ++i) pick[i] = pick[i - 1] + 1;
  }
  return best;
}

double mean_l1_all_pairs(const double* a, int count_a, const double* b, int count_b, int dim) {
  double sum = 0.0;
  for (int i = 0; i < count_a; ++i) {
    for (int j = 0; j < count_b; ++j) {
      sum += abs_diff_sum(a + static_cast<std::size_t>(i) * dim,
                          b + static_cast<std::size_t>(j) * dim, dim);
    }
  }
  return sum / (static_cast<double>(count_a) * count_b);
}

std::vector<double> kt_code(const double* codewords, int M, int n, const double* x) {
  std::vector<double> z(M);
  double mean = 0.0;
  for (int j = 0; j < M; ++j) {
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
      const double d = x[i] - codewords[static_cast<std::size_t>(j) * n + i];
      s += d * d;
    }
    z[j] = std::sqrt(s);
    mean += z[j];
  }
  mean /= M;
  std::vector<double> out(M);
  for (int j = 0; j < M; ++j) out[j] = mean - z[j] > 0.0 ? mean - z[j] : 0.0;
  return out;
}

std::vector<double> sa_code(const double* codewords, int M, int n, const double* x, double beta) {
  std::vector<double> e(M);
  double total = 0.0;
  for (int j = 0; j < M; ++j) {
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
      const double d = x[i] - codewords[static_cast<std::size_t>(j) * n + i];
      s += d * d;
    }
    e[j] = std::exp(-beta * s);
    total += e[j];
  }
  for (int j = 0; j < M; ++j) e[j] /= total;
  return e;
}

std::vector<double> lloyd_sse(const ufl::PatchBatch& batch, std::vector<double> centroids, int M,
                              int iters) {
  const int N = batch.count;
  const int n = batch.dim;
  std::vector<int> assign(N, 0);
  std::vector<double> sse_per_iter;

  auto sqdist = [n](const double* a, const double* b) {
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
      const double d = a[i] - b[i];
      s += d * d;
    }
    return s;
  };

  for (int it = 0; it < iters; ++it) {
    double sse = 0.0;
    for (int i = 0; i < N; ++i) {
      int best = 0;
      double bd = sqdist(batch.patch(i), centroids.data());
      for (int j = 1; j < M; ++j) {
        const double d = sqdist(batch.patch(i), centroids.data() + static_cast<std::size_t>(j) * n);
        if (d < bd) {
          bd = d;
          best = j;
        }
      }
      assign[i] = best;
      sse += bd;
    }
    sse_per_iter.push_back(sse);

    std::vector<double> sums(static_cast<std::size_t>(M) * n, 0.0);
    std::vector<int> counts(M, 0);
    for (int i = 0; i < N; ++i) {
      for (int c = 0; c < n; ++c) {
        sums[static_cast<std::size_t>(assign[i]) * n + c] += batch.patch(i)[c];
      }
      ++counts[assign[i]];
    }
    for (int j = 0; j < M; ++j) {
      if (counts[j] == 0) continue;
      for (int c = 0; c < n; ++c) {
        centroids[static_cast<std::size_t>(j) * n + c] =
            sums[static_cast<std::size_t>(j) * n + c] / counts[j];
      }
    }
    for (int j = 0; j < M; ++j) {
      if (counts[j] != 0) continue;
      int far = 0;
      double far_d = -1.0;
      for (int i = 0; i < N; ++i) {
        const double d =
            sqdist(batch.patch(i), centroids.data() + static_cast<std::size_t>(assign[i]) * n);
        if (d > far_d) {
          far_d = d;
          far = i;
        }
      }
      for (int c = 0; c < n; ++c) {
        centroids[static_cast<std::size_t>(j) * n + c] = batch.patch(far)[c];
      }
      assign[far] = j;
      counts[j] = 1;
    }
  }
  return sse_per_iter;
}

}  // namespace oracle
