#include "ufl/dictionary.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <random>
#include <sstream>
#include <stdexcept>

#include "ufl/encode.hpp"
#include "ufl/simd/kernels.hpp"
#include "ufl/util.hpp"

namespace ufl {

namespace {

double norm2sq(const double* x, int n) { return simd::dot(x, x, n); }

void normalize_row(double* x, int n) {
  const double norm = std::sqrt(norm2sq(x, n));
  if (norm < 1e-300) throw std::runtime_error("cannot normalize a zero-norm codeword");
  for (int i = 0; i < n; ++i) x[i] /= norm;
}

// M distinct indices of nonzero-norm batch rows, sorted ascending.
std::vector<int> sample_distinct_rows(const PatchBatch& batch, int M, std::mt19937_64& rng) {
  int nonzero = 0;
  std::vector<char> usable(batch.count, 0);
  for (int i = 0; i < batch.count; ++i) {
    if (norm2sq(batch.patch(i), batch.dim) > 0.0) {
      usable[i] = 1;
      ++nonzero;
    }
  }
  if (nonzero < M) throw std::runtime_error("fewer nonzero patches than dictionary size");

  std::uniform_int_distribution<int> pick(0, batch.count - 1);
  std::vector<char> chosen(batch.count, 0);
  std::vector<int> indices;
  indices.reserve(M);
  while (static_cast<int>(indices.size()) < M) {
    const int i = pick(rng);
    if (!usable[i] || chosen[i]) continue;
    chosen[i] = 1;
    indices.push_back(i);
  }
  std::sort(indices.begin(), indices.end());
  return indices;
}

Dictionary make_dict(const PatchBatch& batch, DictMethod method, std::vector<double> codewords,
                     int M) {
  Dictionary d;
  d.size = M;
  d.dim = batch.dim;
  d.method = method;
  d.codewords = std::move(codewords);
  d.whitening = identity_whitening(batch.dim);
  return d;
}

void check_learn_args(const PatchBatch& batch, int M) {
  if (M < 2) throw std::runtime_error("dictionary size must be at least 2");
  if (batch.count < M) throw std::runtime_error("need at least M patches to learn M codewords");
  if (batch.dim < 1) throw std::runtime_error("empty patch batch");
}

// Point farthest from its assigned centroid (ties -> lowest index).
int farthest_point(const PatchBatch& batch, const std::vector<double>& centroids,
                   const std::vector<int>& assign, std::vector<double>& d2) {
  const int n = batch.dim;
  for (int i = 0; i < batch.count; ++i) {
    d2[i] = simd::sqdist(batch.patch(i), centroids.data() + static_cast<std::size_t>(assign[i]) * n,
                         n);
  }
  int best = 0;
  for (int i = 1; i < batch.count; ++i) {
    if (d2[i] > d2[best]) best = i;
  }
  return best;
}

}  // namespace

const char* dict_method_name(DictMethod m) {
  switch (m) {
    case DictMethod::kmeans: return "kmeans";
    case DictMethod::ksvd: return "ksvd";
    case DictMethod::random: return "random";
  }
  return "unknown";
}

DictMethod parse_dict_method(const std::string& name) {
  if (name == "kmeans") return DictMethod::kmeans;
  if (name == "ksvd") return DictMethod::ksvd;
  if (name == "random") return DictMethod::random;
  throw std::runtime_error("unknown dictionary method: " + name);
}

std::vector<double> kmeans_pp_init(const PatchBatch& batch, int M, std::uint64_t seed) {
  const int N = batch.count;
  const int n = batch.dim;
  if (N < M || M < 1) throw std::runtime_error("k-means++ needs at least M points");

  std::mt19937_64 rng(seed);
  std::vector<double> centroids(static_cast<std::size_t>(M) * n);
  std::uniform_int_distribution<int> uniform_idx(0, N - 1);

  const int first = uniform_idx(rng);
  std::memcpy(centroids.data(), batch.patch(first), sizeof(double) * n);

  std::vector<double> d2(N);
  for (int i = 0; i < N; ++i) d2[i] = simd::sqdist(batch.patch(i), centroids.data(), n);

  for (int m = 1; m < M; ++m) {
    double total = 0.0;
    for (int i = 0; i < N; ++i) total += d2[i];
    int pick;
    if (total > 0.0) {
      const double r = std::uniform_real_distribution<double>(0.0, total)(rng);
      double acc = 0.0;
      pick = N - 1;
      for (int i = 0; i < N; ++i) {
        acc += d2[i];
        if (acc > r) {
          pick = i;
          break;
        }
      }
    } else {
      pick = uniform_idx(rng);  // all points coincide with chosen centroids
    }
    double* c = centroids.data() + static_cast<std::size_t>(m) * n;
    std::memcpy(c, batch.patch(pick), sizeof(double) * n);
    for (int i = 0; i < N; ++i) d2[i] = std::min(d2[i], simd::sqdist(batch.patch(i), c, n));
  }
  return centroids;
}

Dictionary learn_kmeans(const PatchBatch& batch, int M, int iters, std::uint64_t seed,
                        LearnStats* stats) {
  check_learn_args(batch, M);
  if (iters < 1) throw std::runtime_error("k-means needs at least one iteration");
  const int N = batch.count;
  const int n = batch.dim;

  std::vector<double> centroids = kmeans_pp_init(batch, M, seed);
  std::vector<int> assign(N, 0);
  std::vector<double> best_d2(N, 0.0);
  std::vector<double> scratch_d2(N);

  for (int it = 0; it < iters; ++it) {
    parallel_for(N, [&](std::size_t lo, std::size_t hi) {
      for (std::size_t i = lo; i < hi; ++i) {
        const double* x = batch.patch(static_cast<int>(i));
        int best = 0;
        double bd = simd::sqdist(x, centroids.data(), n);
        for (int j = 1; j < M; ++j) {
          const double d = simd::sqdist(x, centroids.data() + static_cast<std::size_t>(j) * n, n);
          if (d < bd) {
            bd = d;
            best = j;
          }
        }
        assign[i] = best;
        best_d2[i] = bd;
      }
    });
    double sse = 0.0;
    for (int i = 0; i < N; ++i) sse += best_d2[i];  // fixed reduction order
    if (stats != nullptr) stats->objective.push_back(sse);

    std::vector<double> sums(static_cast<std::size_t>(M) * n, 0.0);
    std::vector<int> counts(M, 0);
    for (int i = 0; i < N; ++i) {
      const double* x = batch.patch(i);
      double* s = sums.data() + static_cast<std::size_t>(assign[i]) * n;
      for (int c = 0; c < n; ++c) s[c] += x[c];
      ++counts[assign[i]];
    }
    for (int j = 0; j < M; ++j) {
      if (counts[j] == 0) continue;
      double* c = centroids.data() + static_cast<std::size_t>(j) * n;
      const double* s = sums.data() + static_cast<std::size_t>(j) * n;
      for (int d = 0; d < n; ++d) c[d] = s[d] / counts[j];
    }
    for (int j = 0; j < M; ++j) {
      if (counts[j] != 0) continue;
      const int p = farthest_point(batch, centroids, assign, scratch_d2);
      std::memcpy(centroids.data() + static_cast<std::size_t>(j) * n, batch.patch(p),
                  sizeof(double) * n);
      assign[p] = j;
      counts[j] = 1;
    }
  }

  for (int j = 0; j < M; ++j) {
    double* c = centroids.data() + static_cast<std::size_t>(j) * n;
    if (norm2sq(c, n) < 1e-24) {
      const int p = farthest_point(batch, centroids, assign, scratch_d2);
      std::memcpy(c, batch.patch(p), sizeof(double) * n);
      assign[p] = j;
    }
    normalize_row(c, n);
  }
  return make_dict(batch, DictMethod::kmeans, std::move(centroids), M);
}

Dictionary learn_ksvd(const PatchBatch& batch, int M, int k, int iters, std::uint64_t seed,
                      LearnStats* stats) {
  check_learn_args(batch, M);
  if (k < 1 || k > M) throw std::runtime_error("K-SVD sparsity must satisfy 1 <= k <= M");
  if (iters < 0) throw std::runtime_error("negative iteration count");
  const int N = batch.count;
  const int n = batch.dim;

  std::mt19937_64 rng(seed);
  const std::vector<int> init_rows = sample_distinct_rows(batch, M, rng);
  std::vector<double> dict(static_cast<std::size_t>(M) * n);
  for (int j = 0; j < M; ++j) {
    double* d = dict.data() + static_cast<std::size_t>(j) * n;
    std::memcpy(d, batch.patch(init_rows[j]), sizeof(double) * n);
    normalize_row(d, n);
  }
  if (iters == 0) return make_dict(batch, DictMethod::ksvd, std::move(dict), M);

  std::vector<SparseCode> codes(N);
  std::vector<double> res2(N);
  for (int i = 0; i < N; ++i) res2[i] = norm2sq(batch.patch(i), n);

  std::vector<double> residual(n);
  for (int it = 0; it < iters; ++it) {
    // Coding stage. A fresh OMP code is kept only if it beats the carried-over
    // code under the current dictionary, so the objective cannot go up here.
    parallel_for(N, [&](std::size_t lo, std::size_t hi) {
      std::vector<int> idx;
      std::vector<double> coef;
      for (std::size_t i = lo; i < hi; ++i) {
        const double r2 = omp_code(dict.data(), M, n, batch.patch(static_cast<int>(i)), k, idx,
                                   coef);
        if (r2 <= res2[i]) {
          codes[i].idx = idx;
          codes[i].coef = coef;
          res2[i] = r2;
        }
      }
    });
    if (stats != nullptr) {
      double obj = 0.0;
      for (int i = 0; i < N; ++i) obj += res2[i];
      stats->objective.push_back(obj);
    }

    std::vector<std::vector<int>> users(M);
    for (int i = 0; i < N; ++i) {
      for (const int j : codes[i].idx) users[j].push_back(i);
    }

    std::vector<char> taken(N, 0);  // samples already spent on dead atoms
    std::vector<double> e;          // restricted residual, |users| x n
    std::vector<double> e_norm2, v, u(n), w(n);
    for (int j = 0; j < M; ++j) {
      double* dj = dict.data() + static_cast<std::size_t>(j) * n;
      if (users[j].empty()) {
        // Replace a dead atom with the worst-reconstructed sample.
        int worst = -1;
        for (int i = 0; i < N; ++i) {
          if (taken[i] || norm2sq(batch.patch(i), n) <= 0.0) continue;
          if (worst < 0 || res2[i] > res2[worst]) worst = i;
        }
        if (worst >= 0) {
          taken[worst] = 1;
          std::memcpy(dj, batch.patch(worst), sizeof(double) * n);
          normalize_row(dj, n);
        }
        continue;
      }

      const int cnt = static_cast<int>(users[j].size());
      e.assign(static_cast<std::size_t>(cnt) * n, 0.0);
      e_norm2.assign(cnt, 0.0);
      for (int r = 0; r < cnt; ++r) {
        const int i = users[j][r];
        std::memcpy(residual.data(), batch.patch(i), sizeof(double) * n);
        for (std::size_t t = 0; t < codes[i].idx.size(); ++t) {
          if (codes[i].idx[t] == j) continue;
          const double* dl = dict.data() + static_cast<std::size_t>(codes[i].idx[t]) * n;
          const double c = codes[i].coef[t];
          for (int d = 0; d < n; ++d) residual[d] -= c * dl[d];
        }
        std::memcpy(e.data() + static_cast<std::size_t>(r) * n, residual.data(),
                    sizeof(double) * n);
        e_norm2[r] = norm2sq(residual.data(), n);
      }

      // Rank-1 fit of E by power iteration started at the current atom; the
      // Rayleigh quotient of E E^T is non-decreasing, so the fit error is not.
      std::memcpy(u.data(), dj, sizeof(double) * n);
      v.assign(cnt, 0.0);
      for (int t = 0; t < 25; ++t) {
        for (int r = 0; r < cnt; ++r) {
          v[r] = simd::dot(e.data() + static_cast<std::size_t>(r) * n, u.data(), n);
        }
        std::fill(w.begin(), w.end(), 0.0);
        for (int r = 0; r < cnt; ++r) {
          const double* er = e.data() + static_cast<std::size_t>(r) * n;
          for (int d = 0; d < n; ++d) w[d] += v[r] * er[d];
        }
        const double wn = std::sqrt(norm2sq(w.data(), n));
        if (wn < 1e-300) break;
        for (int d = 0; d < n; ++d) u[d] = w[d] / wn;
      }
      std::memcpy(dj, u.data(), sizeof(double) * n);
      for (int r = 0; r < cnt; ++r) {
        const int i = users[j][r];
        const double vi = simd::dot(e.data() + static_cast<std::size_t>(r) * n, u.data(), n);
        for (std::size_t t = 0; t < codes[i].idx.size(); ++t) {
          if (codes[i].idx[t] == j) codes[i].coef[t] = vi;
        }
        res2[i] = std::max(0.0, e_norm2[r] - vi * vi);
      }
    }
  }
  return make_dict(batch, DictMethod::ksvd, std::move(dict), M);
}

Dictionary learn_random(const PatchBatch& batch, int M, std::uint64_t seed) {
  check_learn_args(batch, M);
  std::mt19937_64 rng(seed);
  const std::vector<int> rows = sample_distinct_rows(batch, M, rng);
  std::vector<double> codewords(static_cast<std::size_t>(M) * batch.dim);
  for (int j = 0; j < M; ++j) {
    double* d = codewords.data() + static_cast<std::size_t>(j) * batch.dim;
    std::memcpy(d, batch.patch(rows[j]), sizeof(double) * batch.dim);
    normalize_row(d, batch.dim);
  }
  return make_dict(batch, DictMethod::random, std::move(codewords), M);
}

Dictionary learn_dictionary(const PatchBatch& whitened_batch, const WhiteningTransform& whitening,
                            DictMethod method, int M, int iters, int k, std::uint64_t seed,
                            LearnStats* stats) {
  Dictionary d;
  switch (method) {
    case DictMethod::kmeans: d = learn_kmeans(whitened_batch, M, iters, seed, stats); break;
    case DictMethod::ksvd: d = learn_ksvd(whitened_batch, M, k, iters, seed, stats); break;
    case DictMethod::random: d = learn_random(whitened_batch, M, seed); break;
  }
  d.whitening = whitening;
  return d;
}

void save_dictionary(const Dictionary& d, const std::string& path) {
  const int M = d.size;
  const int n = d.dim;
  if (M < 2 || n < 1) throw std::runtime_error("dictionary has invalid dimensions");
  if (static_cast<int>(d.codewords.size()) != M * n ||
      static_cast<int>(d.whitening.mean.size()) != n ||
      static_cast<int>(d.whitening.matrix.size()) != n * n) {
    throw std::runtime_error("dictionary fields have inconsistent sizes");
  }
  for (const double v : d.codewords) {
    if (!std::isfinite(v)) throw std::runtime_error("dictionary contains non-finite values");
  }
  for (const double v : d.whitening.matrix) {
    if (!std::isfinite(v)) throw std::runtime_error("dictionary contains non-finite values");
  }

  std::string out = "UFLDICT 1 " + std::to_string(M) + " " + std::to_string(n) + " " +
                    dict_method_name(d.method) + " " + format_g17(d.whitening.epsilon) + "\n";
  auto append_row = [&out](const double* row, int count) {
    for (int i = 0; i < count; ++i) {
      if (i > 0) out += ' ';
      out += format_g17(row[i]);
    }
    out += '\n';
  };
  append_row(d.whitening.mean.data(), n);
  for (int r = 0; r < n; ++r) append_row(d.whitening.matrix.data() + static_cast<std::size_t>(r) * n, n);
  for (int j = 0; j < M; ++j) append_row(d.codeword(j), n);
  write_file_atomic(path, out);
}

Dictionary load_dictionary(const std::string& path) {
  std::istringstream in(read_file(path));
  std::string magic;
  int version = 0, M = 0, n = 0;
  std::string method;
  double epsilon = 0.0;
  if (!(in >> magic) || magic != "UFLDICT") {
    throw std::runtime_error("not a dictionary file (bad magic): " + path);
  }
  if (!(in >> version >> M >> n >> method >> epsilon) || version != 1) {
    throw std::runtime_error("unsupported dictionary header: " + path);
  }
  if (M < 2 || n < 1) throw std::runtime_error("dictionary has invalid dimensions: " + path);

  Dictionary d;
  d.size = M;
  d.dim = n;
  d.method = parse_dict_method(method);
  d.whitening.dim = n;
  d.whitening.epsilon = epsilon;
  d.whitening.mean.resize(n);
  d.whitening.matrix.resize(static_cast<std::size_t>(n) * n);
  d.codewords.resize(static_cast<std::size_t>(M) * n);

  auto read_block = [&in, &path](double* dst, std::size_t count) {
    for (std::size_t i = 0; i < count; ++i) {
      if (!(in >> dst[i]) || !std::isfinite(dst[i])) {
        throw std::runtime_error("truncated or non-finite dictionary data: " + path);
      }
    }
  };
  read_block(d.whitening.mean.data(), n);
  read_block(d.whitening.matrix.data(), static_cast<std::size_t>(n) * n);
  read_block(d.codewords.data(), static_cast<std::size_t>(M) * n);

  std::string extra;
  if (in >> extra) throw std::runtime_error("trailing data in dictionary file: " + path);

  for (int j = 0; j < M; ++j) {
    const double norm = std::sqrt(norm2sq(d.codeword(j), n));
    if (std::abs(norm - 1.0) > 1e-6) {
      throw std::runtime_error("codeword " + std::to_string(j) + " is not unit norm: " + path);
    }
  }
  return d;
}

}  // namespace ufl
