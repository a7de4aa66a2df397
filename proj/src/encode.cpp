#include "ufl/encode.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <stdexcept>

#include "ufl/patches.hpp"
#include "ufl/simd/kernels.hpp"
#include "ufl/util.hpp"

namespace ufl {

const char* encode_scheme_name(EncodeScheme s) {
  switch (s) {
    case EncodeScheme::kt: return "kt";
    case EncodeScheme::sa: return "sa";
    case EncodeScheme::omp: return "omp";
  }
  return "unknown";
}

EncodeScheme parse_encode_scheme(const std::string& name) {
  if (name == "kt") return EncodeScheme::kt;
  if (name == "sa") return EncodeScheme::sa;
  if (name == "omp") return EncodeScheme::omp;
  throw std::runtime_error("unknown encoding scheme: " + name);
}

void encode_kt(const Dictionary& dict, const double* patch, double* out) {
  const int M = dict.size;
  double mean = 0.0;
  for (int j = 0; j < M; ++j) {
    out[j] = std::sqrt(simd::sqdist(patch, dict.codeword(j), dict.dim));
    mean += out[j];
  }
  mean /= M;
  for (int j = 0; j < M; ++j) out[j] = std::max(0.0, mean - out[j]);
}

void encode_sa(const Dictionary& dict, const double* patch, double beta, double* out) {
  if (beta <= 0.0) throw std::runtime_error("SA smoothing factor must be positive");
  const int M = dict.size;
  double lo = 0.0;
  for (int j = 0; j < M; ++j) {
    out[j] = simd::sqdist(patch, dict.codeword(j), dict.dim);
    if (j == 0 || out[j] < lo) lo = out[j];
  }
  double sum = 0.0;
  for (int j = 0; j < M; ++j) {
    out[j] = std::exp(-beta * (out[j] - lo));
    sum += out[j];
  }
  for (int j = 0; j < M; ++j) out[j] /= sum;
}

double omp_code(const double* codewords, int M, int n, const double* x, int k,
                std::vector<int>& idx, std::vector<double>& coef) {
  if (k < 1 || k > M) throw std::runtime_error("OMP sparsity must satisfy 1 <= k <= M");
  idx.clear();
  coef.clear();

  std::vector<double> residual(x, x + n);
  double res2 = simd::dot(residual.data(), residual.data(), n);
  std::vector<char> active(M, 0);
  Eigen::MatrixXd atoms(n, k);
  Eigen::Map<const Eigen::VectorXd> xv(x, n);

  for (int step = 0; step < k; ++step) {
    if (std::sqrt(res2) < 1e-10) break;
    int best = -1;
    double best_abs = -1.0;
    for (int j = 0; j < M; ++j) {
      if (active[j]) continue;
      const double c = std::abs(
          simd::dot(codewords + static_cast<std::size_t>(j) * n, residual.data(), n));
      if (c > best_abs) {  // strict: ties keep the lowest index
        best_abs = c;
        best = j;
      }
    }
    if (best < 0) break;
    active[best] = 1;
    idx.push_back(best);
    for (int d = 0; d < n; ++d) atoms(d, step) = codewords[static_cast<std::size_t>(best) * n + d];

    const auto g = atoms.leftCols(step + 1);
    const Eigen::VectorXd a = g.colPivHouseholderQr().solve(xv);
    const Eigen::VectorXd r = xv - g * a;
    for (int d = 0; d < n; ++d) residual[d] = r[d];
    res2 = simd::dot(residual.data(), residual.data(), n);
    coef.assign(a.data(), a.data() + step + 1);
  }
  return res2;
}

void encode_omp(const Dictionary& dict, const double* patch, int k, double* out) {
  std::vector<int> idx;
  std::vector<double> coef;
  omp_code(dict.codewords.data(), dict.size, dict.dim, patch, k, idx, coef);
  std::fill(out, out + dict.size, 0.0);
  for (std::size_t t = 0; t < idx.size(); ++t) out[idx[t]] = coef[t];
}

PixelFeatureMap encode_image(const Dictionary& dict, const Image& img, const EncoderConfig& cfg) {
  const int w = cfg.pixel_patch_width;
  if (w < 1 || w % 2 == 0) throw std::runtime_error("pixel patch width must be odd and positive");
  if (dict.dim != w * w) {
    throw std::runtime_error("dictionary dimension does not match the patch size");
  }
  if (img.empty()) throw std::runtime_error("cannot encode an empty image");
  if (cfg.scheme == EncodeScheme::sa && cfg.beta <= 0.0) {
    throw std::runtime_error("SA smoothing factor must be positive");
  }
  if (cfg.scheme == EncodeScheme::omp && (cfg.k < 1 || cfg.k > dict.size)) {
    throw std::runtime_error("OMP sparsity must satisfy 1 <= k <= M");
  }

  PixelFeatureMap pf;
  pf.width = img.width;
  pf.height = img.height;
  pf.dim = dict.size;
  pf.data.resize(static_cast<std::size_t>(img.width) * img.height * dict.size);

  const int half = w / 2;
  const int n = dict.dim;
  parallel_for(static_cast<std::size_t>(img.height), [&](std::size_t lo, std::size_t hi) {
    std::vector<double> patch(n), white(n), scratch(n);
    std::vector<int> omp_idx;
    std::vector<double> omp_coef;
    for (std::size_t y = lo; y < hi; ++y) {
      for (int x = 0; x < img.width; ++x) {
        // Centered patch with replicate padding at the borders.
        for (int dy = -half; dy <= half; ++dy) {
          const int sy = std::clamp(static_cast<int>(y) + dy, 0, img.height - 1);
          const double* row = img.data.data() + static_cast<std::size_t>(sy) * img.width;
          double* dst = patch.data() + static_cast<std::size_t>(dy + half) * w;
          for (int dx = -half; dx <= half; ++dx) {
            dst[dx + half] = row[std::clamp(x + dx, 0, img.width - 1)];
          }
        }
        normalize_patch(patch.data(), n);
        whiten_vector(dict.whitening, patch.data(), white.data(), scratch.data());

        double* out = pf.feature(x, static_cast<int>(y));
        switch (cfg.scheme) {
          case EncodeScheme::kt: encode_kt(dict, white.data(), out); break;
          case EncodeScheme::sa: encode_sa(dict, white.data(), cfg.beta, out); break;
          case EncodeScheme::omp: {
            omp_code(dict.codewords.data(), dict.size, n, white.data(), cfg.k, omp_idx, omp_coef);
            std::fill(out, out + dict.size, 0.0);
            for (std::size_t t = 0; t < omp_idx.size(); ++t) out[omp_idx[t]] = omp_coef[t];
            break;
          }
        }
      }
    }
  });
  return pf;
}

PatchFeatureMap max_pool(const PixelFeatureMap& pf, int pool_width) {
  if (pool_width < 1) throw std::runtime_error("pool width must be positive");
  const int cols = pf.width / pool_width;
  const int rows = pf.height / pool_width;
  if (cols < 1 || rows < 1) throw std::runtime_error("feature map smaller than one pooling tile");

  PatchFeatureMap out;
  out.cols = cols;
  out.rows = rows;
  out.dim = pf.dim;
  out.data.assign(static_cast<std::size_t>(cols) * rows * pf.dim, 0.0);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      double* dst = out.feature(c, r);
      std::memcpy(dst, pf.feature(c * pool_width, r * pool_width), sizeof(double) * pf.dim);
      for (int py = 0; py < pool_width; ++py) {
        for (int px = 0; px < pool_width; ++px) {
          if (px == 0 && py == 0) continue;
          simd::max_inplace(dst, pf.feature(c * pool_width + px, r * pool_width + py), pf.dim);
        }
      }
    }
  }
  return out;
}

}  // namespace ufl
