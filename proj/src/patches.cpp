#include "ufl/patches.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace ufl {

namespace {

// Variance regularizer on the [0,1] intensity scale: 10 / 255^2.
constexpr double kVarReg = 10.0 / (255.0 * 255.0);

}  // namespace

PatchBatch extract_random_patches(const std::vector<Image>& images, int patch_width, int count,
                                  std::uint64_t seed) {
  if (patch_width < 1) throw std::runtime_error("patch width must be positive");
  if (count < 1) throw std::runtime_error("patch count must be at least 1");

  // Prefix sums of valid top-left positions per image; a single uniform draw
  // over the total picks both the image and the position.
  std::vector<std::uint64_t> prefix(images.size() + 1, 0);
  for (std::size_t i = 0; i < images.size(); ++i) {
    const int vx = images[i].width - patch_width + 1;
    const int vy = images[i].height - patch_width + 1;
    const std::uint64_t valid =
        (vx > 0 && vy > 0) ? static_cast<std::uint64_t>(vx) * static_cast<std::uint64_t>(vy) : 0;
    prefix[i + 1] = prefix[i] + valid;
  }
  const std::uint64_t total = prefix.back();
  if (total == 0) throw std::runtime_error("no image large enough to sample patches from");

  PatchBatch batch;
  batch.count = count;
  batch.patch_width = patch_width;
  batch.dim = patch_width * patch_width;
  batch.data.resize(static_cast<std::size_t>(count) * batch.dim);

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::uint64_t> pick(0, total - 1);
  for (int p = 0; p < count; ++p) {
    const std::uint64_t r = pick(rng);
    std::size_t img_idx = 0;
    while (prefix[img_idx + 1] <= r) ++img_idx;
    const Image& img = images[img_idx];
    const std::uint64_t local = r - prefix[img_idx];
    const int vx = img.width - patch_width + 1;
    const int x = static_cast<int>(local % static_cast<std::uint64_t>(vx));
    const int y = static_cast<int>(local / static_cast<std::uint64_t>(vx));
    extract_patch(img, x, y, patch_width, batch.patch(p));
  }
  return batch;
}

void extract_patch(const Image& img, int x, int y, int patch_width, double* out) {
  if (x < 0 || y < 0 || x + patch_width > img.width || y + patch_width > img.height) {
    throw std::runtime_error("patch out of image bounds");
  }
  for (int r = 0; r < patch_width; ++r) {
    const double* src = img.data.data() + static_cast<std::size_t>(y + r) * img.width + x;
    double* dst = out + static_cast<std::size_t>(r) * patch_width;
    for (int c = 0; c < patch_width; ++c) dst[c] = src[c];
  }
}

void normalize_patch(double* patch, int dim) {
  double mean = 0.0;
  for (int i = 0; i < dim; ++i) mean += patch[i];
  mean /= dim;
  double var = 0.0;
  for (int i = 0; i < dim; ++i) {
    const double d = patch[i] - mean;
    var += d * d;
  }
  var /= dim;
  const double inv = 1.0 / std::sqrt(var + kVarReg);
  for (int i = 0; i < dim; ++i) patch[i] = (patch[i] - mean) * inv;
}

void normalize_patches(PatchBatch& batch) {
  for (int p = 0; p < batch.count; ++p) normalize_patch(batch.patch(p), batch.dim);
}

}  // namespace ufl
