#pragma once

// Brute-force reference implementations used only by tests. They reuse the
// library's plain data types but transcribe every formula independently of
// the production code paths.

#include <cstdint>
#include <utility>
#include <vector>

#include "ufl/matching.hpp"
#include "ufl/patches.hpp"

namespace oracle {

// Exhaustive minimization of the truncated-L1 MRF energy. Enumerates every
// labeling (guarded to at most 10^6) and returns the lexicographically first
// argmin with its energy.
std::pair<std::vector<int>, double> brute_force_labeling(const ufl::MrfProblem& problem,
                                                         double alpha, double gamma);

// Energy of one labeling, recomputed from scratch.
double labeling_energy(const ufl::MrfProblem& problem, const std::vector<int>& labels,
                       double alpha, double gamma);

// O(n^2) min-convolution: out(t) = min_t' [h(t') + alpha * min(||t-t'||_1, gamma)].
std::vector<double> naive_min_convolution(const std::vector<double>& h, int u_count, int v_count,
                                          double alpha, double gamma);

// Least-squares residual (squared norm) minimized over all C(M,k) supports;
// guarded to at most 10^5 supports.
double exhaustive_omp_bound(const double* codewords, int M, int n, const double* x, int k);

// Mean L1 distance over all row pairs of two row-major feature arrays.
double mean_l1_all_pairs(const double* a, int count_a, const double* b, int count_b, int dim);

// Plain-formula triangle and soft-assignment codes (no stabilization).
std::vector<double> kt_code(const double* codewords, int M, int n, const double* x);
std::vector<double> sa_code(const double* codewords, int M, int n, const double* x, double beta);

// Lloyd's algorithm from the given initialization, mirroring the production
// schedule (assign, record SSE, update means, reseed empty clusters to the
// point farthest from its centroid). Returns the SSE recorded at each
// assignment step.
std::vector<double> lloyd_sse(const ufl::PatchBatch& batch, std::vector<double> centroids, int M,
                              int iters);

}  // namespace oracle
