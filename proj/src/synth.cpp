#include "ufl/synth.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace ufl {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

void box_blur(Image& img, int radius, int passes) {
  Image tmp = img;
  for (int pass = 0; pass < passes; ++pass) {
    for (int y = 0; y < img.height; ++y) {
      for (int x = 0; x < img.width; ++x) {
        double sum = 0.0;
        int count = 0;
        for (int dy = -radius; dy <= radius; ++dy) {
          for (int dx = -radius; dx <= radius; ++dx) {
            const int sx = x + dx;
            const int sy = y + dy;
            if (sx >= 0 && sx < img.width && sy >= 0 && sy < img.height) {
              sum += img.at(sx, sy);
              ++count;
            }
          }
        }
        tmp.at(x, y) = sum / count;
      }
    }
    std::swap(img.data, tmp.data);
  }
}

// Two rectangles with labels 1 and 2; everything else unlabeled.
LabelMap base_labels(int width, int height, BoundingBox* box1) {
  LabelMap lm;
  lm.width = width;
  lm.height = height;
  lm.labels.assign(static_cast<std::size_t>(width) * height, 0);
  const BoundingBox r1{width / 8, height / 8, std::max(1, width / 4), std::max(1, height / 4)};
  const BoundingBox r2{width / 2, height / 2, std::max(1, width / 4), std::max(1, height / 4)};
  for (int y = r1.y; y < std::min(height, r1.y + r1.h); ++y) {
    for (int x = r1.x; x < std::min(width, r1.x + r1.w); ++x) lm.at(x, y) = 1;
  }
  for (int y = r2.y; y < std::min(height, r2.y + r2.h); ++y) {
    for (int x = r2.x; x < std::min(width, r2.x + r2.w); ++x) lm.at(x, y) = 2;
  }
  if (box1 != nullptr) *box1 = r1;
  return lm;
}

FlowField constant_flow(int width, int height, int du, int dv) {
  FlowField f;
  f.granularity = FlowGranularity::pixel;
  f.width = width;
  f.height = height;
  const std::size_t count = static_cast<std::size_t>(width) * height;
  f.u.assign(count, du);
  f.v.assign(count, dv);
  return f;
}

}  // namespace

Image synth_texture(int width, int height, std::uint64_t seed) {
  Image img = make_image(width, height);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  for (double& v : img.data) v = uni(rng);
  box_blur(img, 1, 2);

  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const double s = 0.18 * std::sin(kTwoPi * x / 23.0) +
                       0.18 * std::sin(kTwoPi * y / 31.0) +
                       0.12 * std::sin(kTwoPi * (0.8 * x + 0.3 * y) / 17.0);
      img.at(x, y) += s;
    }
  }
  const auto [lo, hi] = std::minmax_element(img.data.begin(), img.data.end());
  const double span = *hi - *lo;
  for (double& v : img.data) v = span > 0.0 ? (v - *lo) / span : 0.5;
  return img;
}

SynthPair synth_shift_pair(int width, int height, int du, int dv, std::uint64_t seed) {
  SynthPair pair;
  pair.du = du;
  pair.dv = dv;
  pair.test = synth_texture(width, height, seed);

  pair.exemplar = make_image(width, height);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const int sx = std::clamp(x - du, 0, width - 1);
      const int sy = std::clamp(y - dv, 0, height - 1);
      pair.exemplar.at(x, y) = pair.test.at(sx, sy);
    }
  }

  pair.test_labels = base_labels(width, height, &pair.box_test);
  pair.exemplar_labels.width = width;
  pair.exemplar_labels.height = height;
  pair.exemplar_labels.labels.assign(static_cast<std::size_t>(width) * height, 0);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const int sx = x - du;
      const int sy = y - dv;
      if (sx >= 0 && sx < width && sy >= 0 && sy < height) {
        pair.exemplar_labels.at(x, y) = pair.test_labels.at(sx, sy);
      }
    }
  }
  pair.box_exemplar = {pair.box_test.x + du, pair.box_test.y + dv, pair.box_test.w,
                       pair.box_test.h};
  pair.true_flow = constant_flow(width, height, du, dv);
  return pair;
}

SynthPair synth_identity_pair(int width, int height, std::uint64_t seed) {
  SynthPair pair;
  pair.test = synth_texture(width, height, seed);
  pair.exemplar = pair.test;
  pair.test_labels = base_labels(width, height, &pair.box_test);
  pair.exemplar_labels = pair.test_labels;
  pair.box_exemplar = pair.box_test;
  pair.true_flow = constant_flow(width, height, 0, 0);
  return pair;
}

SynthPair synth_noise_pair(int width, int height, std::uint64_t seed) {
  SynthPair pair;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  pair.test = make_image(width, height);
  pair.exemplar = make_image(width, height);
  for (double& v : pair.test.data) v = uni(rng);
  for (double& v : pair.exemplar.data) v = uni(rng);
  pair.test_labels = base_labels(width, height, &pair.box_test);
  pair.exemplar_labels = base_labels(width, height, nullptr);
  pair.box_exemplar = pair.box_test;
  pair.true_flow = constant_flow(width, height, 0, 0);
  return pair;
}

}  // namespace ufl
