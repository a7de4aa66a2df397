#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ufl/patches.hpp"
#include "ufl/whitening.hpp"

namespace ufl {

enum class DictMethod { kmeans, ksvd, random };

const char* dict_method_name(DictMethod m);
DictMethod parse_dict_method(const std::string& name);

// Codebook of M unit-L2 codewords in R^n, plus the whitening fitted alongside
// it so encoders can reproduce the training-time preprocessing.
struct Dictionary {
  int size = 0;  // M
  int dim = 0;   // n
  DictMethod method = DictMethod::random;
  std::vector<double> codewords;  // M x n, row-major
  WhiteningTransform whitening;

  const double* codeword(int j) const {
    return codewords.data() + static_cast<std::size_t>(j) * dim;
  }
  double* codeword(int j) { return codewords.data() + static_cast<std::size_t>(j) * dim; }
};

// One sparse code per sample, at most k nonzeros each.
struct SparseCode {
  std::vector<int> idx;
  std::vector<double> coef;
};
struct SparseCodeMatrix {
  int count = 0;
  int dim = 0;  // M
  int k = 0;
  std::vector<SparseCode> codes;
};

struct LearnStats {
  std::vector<double> objective;  // one value per iteration, non-increasing
};

// k-means++ seeding; returns M x n centroids drawn from the batch.
std::vector<double> kmeans_pp_init(const PatchBatch& batch, int M, std::uint64_t seed);

// Lloyd's algorithm with k-means++ init. Runs exactly `iters` iterations; the
// recorded objective is the within-cluster SSE at each assignment step. Empty
// clusters are reseeded to the point currently farthest from its centroid.
// Final centroids are L2-normalized (a zero-norm centroid is reseeded first).
Dictionary learn_kmeans(const PatchBatch& batch, int M, int iters, std::uint64_t seed,
                        LearnStats* stats = nullptr);

// K-SVD: alternates OMP coding at sparsity k with per-atom rank-1 updates of
// the restricted residual (power iteration started from the current atom).
// Unused atoms are replaced by the worst-reconstructed sample. The recorded
// objective is sum ||x_i - D s_i||^2 after each coding stage. iters = 0
// returns the initialization: M distinct random batch rows, normalized.
Dictionary learn_ksvd(const PatchBatch& batch, int M, int k, int iters, std::uint64_t seed,
                      LearnStats* stats = nullptr);

// M distinct batch rows sampled without replacement (zero-norm rows skipped),
// normalized; selected indices are sorted ascending.
Dictionary learn_random(const PatchBatch& batch, int M, std::uint64_t seed);

// Convenience wrapper: dispatches on method and attaches the whitening.
Dictionary learn_dictionary(const PatchBatch& whitened_batch, const WhiteningTransform& whitening,
                            DictMethod method, int M, int iters, int k, std::uint64_t seed,
                            LearnStats* stats = nullptr);

// Text format, 17-significant-digit numbers, LF line endings:
//   UFLDICT 1 <M> <n> <method> <epsilon>
//   <n mean values>
//   <n rows of the n x n whitening matrix>
//   <M codeword rows of n values>
// Round-trips bit-exactly. load rejects bad magic, bad counts, non-finite
// values, and codewords that are not unit norm.
void save_dictionary(const Dictionary& d, const std::string& path);
Dictionary load_dictionary(const std::string& path);

}  // namespace ufl
