#include "ufl/image.hpp"

#include <png.h>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <stdexcept>

#include "ufl/util.hpp"

namespace ufl {

namespace {

constexpr double kLumaR = 0.299;
constexpr double kLumaG = 0.587;
constexpr double kLumaB = 0.114;

// Skips PNM whitespace and '#' comment lines, then parses a decimal integer.
int parse_pnm_int(const std::string& bytes, std::size_t& pos, const std::string& path) {
  while (pos < bytes.size()) {
    const char c = bytes[pos];
    if (c == '#') {
      while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
    } else if (std::isspace(static_cast<unsigned char>(c))) {
      ++pos;
    } else {
      break;
    }
  }
  if (pos >= bytes.size() || !std::isdigit(static_cast<unsigned char>(bytes[pos]))) {
    throw std::runtime_error("malformed PNM header: " + path);
  }
  long value = 0;
  while (pos < bytes.size() && std::isdigit(static_cast<unsigned char>(bytes[pos]))) {
    value = value * 10 + (bytes[pos] - '0');
    if (value > 1 << 30) throw std::runtime_error("PNM header value out of range: " + path);
    ++pos;
  }
  return static_cast<int>(value);
}

Image load_pnm(const std::string& bytes, const std::string& path) {
  const bool color = bytes[1] == '6';
  std::size_t pos = 2;
  const int width = parse_pnm_int(bytes, pos, path);
  const int height = parse_pnm_int(bytes, pos, path);
  const int maxval = parse_pnm_int(bytes, pos, path);
  if (width < 1 || height < 1) throw std::runtime_error("zero-dimension image: " + path);
  if (maxval != 255) throw std::runtime_error("unsupported PNM maxval (want 255): " + path);
  ++pos;  // single whitespace byte after maxval

  const std::size_t pixels = static_cast<std::size_t>(width) * height;
  const std::size_t need = pixels * (color ? 3 : 1);
  if (bytes.size() - pos < need) throw std::runtime_error("truncated PNM data: " + path);

  Image img = make_image(width, height);
  const unsigned char* p = reinterpret_cast<const unsigned char*>(bytes.data() + pos);
  if (color) {
    for (std::size_t i = 0; i < pixels; ++i) {
      img.data[i] = (kLumaR * p[3 * i] + kLumaG * p[3 * i + 1] + kLumaB * p[3 * i + 2]) / 255.0;
    }
  } else {
    for (std::size_t i = 0; i < pixels; ++i) img.data[i] = p[i] / 255.0;
  }
  return img;
}

Image load_png(const std::string& path) {
  std::FILE* fp = std::fopen(path.c_str(), "rb");
  if (fp == nullptr) throw std::runtime_error("unreadable file: " + path);

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png != nullptr ? png_create_info_struct(png) : nullptr;
  if (png == nullptr || info == nullptr) {
    if (png != nullptr) png_destroy_read_struct(&png, &info, nullptr);
    std::fclose(fp);
    throw std::runtime_error("libpng init failed");
  }

  std::vector<unsigned char> rgb;
  int width = 0, height = 0;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    std::fclose(fp);
    throw std::runtime_error("corrupt PNG: " + path);
  }

  png_init_io(png, fp);
  png_read_info(png, info);
  width = static_cast<int>(png_get_image_width(png, info));
  height = static_cast<int>(png_get_image_height(png, info));

  // Normalize every variant to 8-bit RGB.
  png_set_expand(png);
  png_set_strip_16(png);
  png_set_strip_alpha(png);
  png_set_gray_to_rgb(png);
  png_read_update_info(png, info);

  if (width < 1 || height < 1) {
    png_destroy_read_struct(&png, &info, nullptr);
    std::fclose(fp);
    throw std::runtime_error("zero-dimension image: " + path);
  }

  rgb.resize(static_cast<std::size_t>(width) * height * 3);
  std::vector<png_bytep> rows(height);
  for (int y = 0; y < height; ++y) {
    rows[y] = rgb.data() + static_cast<std::size_t>(y) * width * 3;
  }
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  std::fclose(fp);

  Image img = make_image(width, height);
  const std::size_t pixels = static_cast<std::size_t>(width) * height;
  for (std::size_t i = 0; i < pixels; ++i) {
    img.data[i] =
        (kLumaR * rgb[3 * i] + kLumaG * rgb[3 * i + 1] + kLumaB * rgb[3 * i + 2]) / 255.0;
  }
  return img;
}

}  // namespace

Image make_image(int width, int height, double fill) {
  if (width < 1 || height < 1) throw std::runtime_error("image dimensions must be positive");
  Image img;
  img.width = width;
  img.height = height;
  img.data.assign(static_cast<std::size_t>(width) * height, fill);
  return img;
}

Image load_image(const std::string& path) {
  const std::string bytes = read_file(path);
  if (bytes.size() >= 8 && std::memcmp(bytes.data(), "\x89PNG\r\n\x1a\n", 8) == 0) {
    return load_png(path);
  }
  if (bytes.size() >= 2 && bytes[0] == 'P' && (bytes[1] == '5' || bytes[1] == '6')) {
    return load_pnm(bytes, path);
  }
  throw std::runtime_error("unsupported image format (want PNG or binary PGM/PPM): " + path);
}

void save_pgm(const Image& img, const std::string& path) {
  if (img.empty()) throw std::runtime_error("cannot save empty image");
  std::string bytes = "P5\n" + std::to_string(img.width) + " " + std::to_string(img.height) +
                      "\n255\n";
  bytes.reserve(bytes.size() + img.data.size());
  for (const double v : img.data) {
    const double clamped = v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v);
    bytes.push_back(static_cast<char>(static_cast<unsigned char>(std::lround(clamped * 255.0))));
  }
  write_file_atomic(path, bytes);
}

}  // namespace ufl
