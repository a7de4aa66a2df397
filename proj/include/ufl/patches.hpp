#pragma once

#include <cstdint>
#include <vector>

#include "ufl/image.hpp"

namespace ufl {

// A batch of square patches stored row-major: patch i occupies
// data[i * dim .. (i + 1) * dim), pixels scanned row by row.
struct PatchBatch {
  int count = 0;
  int dim = 0;          // patch_width * patch_width
  int patch_width = 0;
  std::vector<double> data;

  const double* patch(int i) const { return data.data() + static_cast<std::size_t>(i) * dim; }
  double* patch(int i) { return data.data() + static_cast<std::size_t>(i) * dim; }
};

// Samples `count` patches uniformly over all fully-inside positions of all
// images (each valid (image, x, y) triple equally likely). Deterministic for a
// fixed seed. Throws if no image admits a single patch.
PatchBatch extract_random_patches(const std::vector<Image>& images, int patch_width, int count,
                                  std::uint64_t seed);

// Extracts the patch whose top-left corner is (x, y); must be fully inside.
void extract_patch(const Image& img, int x, int y, int patch_width, double* out);

// Per-patch brightness/contrast normalization: y = (x - mean) / sqrt(var + 10/255^2),
// with the population variance. The regularizer keeps the denominator positive,
// so a constant patch maps to exact zeros.
void normalize_patch(double* patch, int dim);
void normalize_patches(PatchBatch& batch);

}  // namespace ufl
