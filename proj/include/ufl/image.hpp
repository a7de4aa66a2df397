#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace ufl {

// Grayscale image with luminance values in [0,1], row-major.
struct Image {
  int width = 0;
  int height = 0;
  std::vector<double> data;

  double at(int x, int y) const { return data[static_cast<std::size_t>(y) * width + x]; }
  double& at(int x, int y) { return data[static_cast<std::size_t>(y) * width + x]; }
  bool empty() const { return width <= 0 || height <= 0; }
};

Image make_image(int width, int height, double fill = 0.0);

// Loads a PNG or a binary PGM/PPM (magic P5/P6, maxval 255). Color inputs
// are reduced to luminance with weights 0.299/0.587/0.114 and scaled to [0,1].
Image load_image(const std::string& path);

// 8-bit binary PGM, values clamped to [0,1] and scaled by 255.
void save_pgm(const Image& img, const std::string& path);

}  // namespace ufl
