#pragma once

#include <vector>

#include "ufl/dictionary.hpp"
#include "ufl/image.hpp"

namespace ufl {

enum class EncodeScheme { kt, sa, omp };

const char* encode_scheme_name(EncodeScheme s);
EncodeScheme parse_encode_scheme(const std::string& name);

struct EncoderConfig {
  EncodeScheme scheme = EncodeScheme::kt;
  double beta = 1.0;          // SA smoothing factor
  int k = 10;                 // OMP sparsity
  int pixel_patch_width = 11; // odd; patch centered on the pixel
  int pool_width = 7;         // non-overlapping pooling tile
};

// Per-pixel codes, row-major; feature(i) has `dim` components.
struct PixelFeatureMap {
  int width = 0;
  int height = 0;
  int dim = 0;
  std::vector<double> data;

  const double* feature(int x, int y) const {
    return data.data() + (static_cast<std::size_t>(y) * width + x) * dim;
  }
  double* feature(int x, int y) {
    return data.data() + (static_cast<std::size_t>(y) * width + x) * dim;
  }
};

// Per-patch pooled features on the cols x rows patch grid.
struct PatchFeatureMap {
  int cols = 0;
  int rows = 0;
  int dim = 0;
  std::vector<double> data;

  const double* feature(int c, int r) const {
    return data.data() + (static_cast<std::size_t>(r) * cols + c) * dim;
  }
  double* feature(int c, int r) {
    return data.data() + (static_cast<std::size_t>(r) * cols + c) * dim;
  }
};

// Triangle coding: out_j = max(0, mean(z) - z_j) with z_j = ||x - d_j||_2.
void encode_kt(const Dictionary& dict, const double* patch, double* out);

// Soft assignment: softmax of -beta * ||x - d_j||^2, min-shifted before
// exponentiation; components are positive and sum to 1.
void encode_sa(const Dictionary& dict, const double* patch, double beta, double* out);

// Orthogonal matching pursuit at sparsity k; dense M-vector output.
void encode_omp(const Dictionary& dict, const double* patch, int k, double* out);

// Greedy OMP core on a raw codeword matrix (M x n, unit-norm rows). Fills
// idx/coef with the active set and least-squares coefficients; returns the
// final squared residual norm. Stops at k atoms or residual norm < 1e-10;
// correlation ties pick the lowest atom index.
double omp_code(const double* codewords, int M, int n, const double* x, int k,
                std::vector<int>& idx, std::vector<double>& coef);

// Encodes the centered pixel_patch_width patch at every pixel (replicate
// padding at borders), after normalization and the dictionary's whitening.
PixelFeatureMap encode_image(const Dictionary& dict, const Image& img, const EncoderConfig& cfg);

// Component-wise max over non-overlapping pool_width tiles anchored at (0,0);
// trailing partial tiles are dropped.
PatchFeatureMap max_pool(const PixelFeatureMap& pf, int pool_width);

}  // namespace ufl
