#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <unistd.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "ufl/image.hpp"
#include "ufl/patches.hpp"
#include "ufl/util.hpp"
#include "ufl/whitening.hpp"

namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    static int counter = 0;
    path = fs::temp_directory_path() /
           ("ufl_pre_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

void write_bytes(const std::string& path, const std::vector<unsigned char>& bytes) {
  std::ofstream out(path, std::ios::binary);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

// Covariance of a batch around its own mean (population normalization).
Eigen::MatrixXd batch_covariance(const ufl::PatchBatch& b) {
  Eigen::MatrixXd x(b.count, b.dim);
  for (int i = 0; i < b.count; ++i)
    for (int j = 0; j < b.dim; ++j) x(i, j) = b.patch(i)[j];
  Eigen::RowVectorXd mean = x.colwise().mean();
  x.rowwise() -= mean;
  return (x.transpose() * x) / static_cast<double>(b.count);
}

ufl::Image noise_image(int w, int h, std::uint64_t seed) {
  ufl::Image img = ufl::make_image(w, h);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(0.0, 1.0);
  for (auto& v : img.data) v = dist(rng);
  return img;
}

}  // namespace

TEST_CASE("load_image reads binary PGM") {
  TempDir tmp;

  SUBCASE("2x2 all-255 maps to 1.0") {
    write_text(tmp.file("a.pgm"), std::string("P5\n2 2\n255\n") + std::string(4, '\xff'));
    ufl::Image img = ufl::load_image(tmp.file("a.pgm"));
    CHECK(img.width == 2);
    CHECK(img.height == 2);
    for (double v : img.data) CHECK(v == 1.0);
  }

  SUBCASE("1x1 zero pixel") {
    write_text(tmp.file("b.pgm"), std::string("P5\n1 1\n255\n") + std::string(1, '\0'));
    ufl::Image img = ufl::load_image(tmp.file("b.pgm"));
    CHECK(img.width == 1);
    CHECK(img.height == 1);
    CHECK(img.data[0] == 0.0);
  }

  SUBCASE("comments and odd whitespace in the header") {
    write_text(tmp.file("c.pgm"),
               std::string("P5 # magic\n# a comment line\n  2\t1 # dims\n255\n") +
                   std::string("\x80\x40", 2));
    ufl::Image img = ufl::load_image(tmp.file("c.pgm"));
    CHECK(img.width == 2);
    CHECK(img.height == 1);
    CHECK(img.at(0, 0) == doctest::Approx(128.0 / 255.0).epsilon(1e-12));
  }
}

TEST_CASE("load_image converts PPM color to luminance") {
  TempDir tmp;
  std::string pix;
  pix += '\xff'; pix += '\0'; pix += '\0';  // red
  pix += '\0'; pix += '\xff'; pix += '\0';  // green
  pix += '\0'; pix += '\0'; pix += '\xff';  // blue
  write_text(tmp.file("rgb.ppm"), "P6\n3 1\n255\n" + pix);
  ufl::Image img = ufl::load_image(tmp.file("rgb.ppm"));
  REQUIRE(img.width == 3);
  CHECK(img.at(0, 0) == doctest::Approx(0.299).epsilon(1e-12));
  CHECK(img.at(1, 0) == doctest::Approx(0.587).epsilon(1e-12));
  CHECK(img.at(2, 0) == doctest::Approx(0.114).epsilon(1e-12));
}

TEST_CASE("load_image reads PNG") {
  TempDir tmp;

  SUBCASE("grayscale") {
    const std::vector<unsigned char> png = {
        0x89, 0x50, 0x4e, 0x47, 0x0d, 0x0a, 0x1a, 0x0a, 0x00, 0x00, 0x00, 0x0d,
        0x49, 0x48, 0x44, 0x52, 0x00, 0x00, 0x00, 0x02, 0x00, 0x00, 0x00, 0x01,
        0x08, 0x00, 0x00, 0x00, 0x00, 0xd1, 0x49, 0x20, 0x56, 0x00, 0x00, 0x00,
        0x0b, 0x49, 0x44, 0x41, 0x54, 0x78, 0x9c, 0x63, 0x60, 0xf8, 0x0f, 0x00,
        0x01, 0x02, 0x01, 0x00, 0x42, 0xbe, 0xbc, 0x68, 0x00, 0x00, 0x00, 0x00,
        0x49, 0x45, 0x4e, 0x44, 0xae, 0x42, 0x60, 0x82};
    write_bytes(tmp.file("g.png"), png);
    ufl::Image img = ufl::load_image(tmp.file("g.png"));
    REQUIRE(img.width == 2);
    REQUIRE(img.height == 1);
    CHECK(img.at(0, 0) == 0.0);
    CHECK(img.at(1, 0) == 1.0);
  }

  SUBCASE("rgb reduces to luminance") {
    const std::vector<unsigned char> png = {
        0x89, 0x50, 0x4e, 0x47, 0x0d, 0x0a, 0x1a, 0x0a, 0x00, 0x00, 0x00, 0x0d,
        0x49, 0x48, 0x44, 0x52, 0x00, 0x00, 0x00, 0x01, 0x00, 0x00, 0x00, 0x01,
        0x08, 0x02, 0x00, 0x00, 0x00, 0x90, 0x77, 0x53, 0xde, 0x00, 0x00, 0x00,
        0x0c, 0x49, 0x44, 0x41, 0x54, 0x78, 0x9c, 0x63, 0xf8, 0xcf, 0xc0, 0x00,
        0x00, 0x03, 0x01, 0x01, 0x00, 0xc9, 0xfe, 0x92, 0xef, 0x00, 0x00, 0x00,
        0x00, 0x49, 0x45, 0x4e, 0x44, 0xae, 0x42, 0x60, 0x82};
    write_bytes(tmp.file("r.png"), png);
    ufl::Image img = ufl::load_image(tmp.file("r.png"));
    REQUIRE(img.width == 1);
    CHECK(img.at(0, 0) == doctest::Approx(0.299).epsilon(1e-12));
  }
}

TEST_CASE("load_image rejects bad inputs") {
  TempDir tmp;
  CHECK_THROWS(ufl::load_image(tmp.file("missing.pgm")));

  write_text(tmp.file("bad_magic.pgm"), "P2\n1 1\n255\n0\n");
  CHECK_THROWS(ufl::load_image(tmp.file("bad_magic.pgm")));

  write_text(tmp.file("zero.pgm"), "P5\n0 1\n255\n");
  CHECK_THROWS(ufl::load_image(tmp.file("zero.pgm")));

  write_text(tmp.file("maxval.pgm"), std::string("P5\n1 1\n65535\n") + std::string(2, '\0'));
  CHECK_THROWS(ufl::load_image(tmp.file("maxval.pgm")));

  write_text(tmp.file("short.pgm"), "P5\n4 4\n255\nab");
  CHECK_THROWS(ufl::load_image(tmp.file("short.pgm")));

  write_text(tmp.file("junk.png"), "\x89PNGnot really");
  CHECK_THROWS(ufl::load_image(tmp.file("junk.png")));
}

TEST_CASE("save_pgm round-trips through load_image") {
  TempDir tmp;
  ufl::Image img = noise_image(9, 5, 3);
  ufl::save_pgm(img, tmp.file("rt.pgm"));
  ufl::Image back = ufl::load_image(tmp.file("rt.pgm"));
  REQUIRE(back.width == img.width);
  REQUIRE(back.height == img.height);
  for (std::size_t i = 0; i < img.data.size(); ++i) {
    // One 8-bit quantization step of slack.
    CHECK(std::abs(back.data[i] - img.data[i]) <= 0.5 / 255.0 + 1e-12);
  }
}

TEST_CASE("extract_random_patches basic contracts") {
  SUBCASE("single possible patch is the whole image") {
    ufl::Image img = noise_image(11, 11, 1);
    ufl::PatchBatch b = ufl::extract_random_patches({img}, 11, 1, 42);
    REQUIRE(b.count == 1);
    REQUIRE(b.dim == 121);
    REQUIRE(b.patch_width == 11);
    for (int j = 0; j < 121; ++j) CHECK(b.patch(0)[j] == img.data[j]);
  }

  SUBCASE("12x11 image has exactly two valid positions") {
    ufl::Image img = noise_image(12, 11, 2);
    std::vector<double> p0(121), p1(121);
    ufl::extract_patch(img, 0, 0, 11, p0.data());
    ufl::extract_patch(img, 1, 0, 11, p1.data());
    ufl::PatchBatch b = ufl::extract_random_patches({img}, 11, 64, 5);
    for (int i = 0; i < b.count; ++i) {
      bool is0 = std::equal(p0.begin(), p0.end(), b.patch(i));
      bool is1 = std::equal(p1.begin(), p1.end(), b.patch(i));
      CHECK((is0 || is1));
    }
  }

  SUBCASE("deterministic for a fixed seed") {
    std::vector<ufl::Image> imgs = {noise_image(64, 64, 10), noise_image(64, 64, 11),
                                    noise_image(64, 64, 12)};
    ufl::PatchBatch a = ufl::extract_random_patches(imgs, 11, 1000, 7);
    ufl::PatchBatch b = ufl::extract_random_patches(imgs, 11, 1000, 7);
    CHECK(a.data == b.data);
    ufl::PatchBatch c = ufl::extract_random_patches(imgs, 11, 1000, 8);
    CHECK(a.data != c.data);
  }

  SUBCASE("errors") {
    ufl::Image small = noise_image(10, 12, 3);
    CHECK_THROWS(ufl::extract_random_patches({small}, 11, 5, 0));
    ufl::Image ok = noise_image(12, 12, 3);
    CHECK_THROWS(ufl::extract_random_patches({ok}, 11, 0, 0));
    CHECK_THROWS(ufl::extract_random_patches({}, 11, 5, 0));
  }
}

TEST_CASE("extract_random_patches stays inside image bounds") {
  // Every pixel value encodes its own (image, x, y), so each sampled patch can
  // be traced back to a unique in-bounds origin and verified wholesale.
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 10; ++trial) {
    int w = 5 + static_cast<int>(rng() % 40);
    int h = 5 + static_cast<int>(rng() % 40);
    int pw = 1 + 2 * static_cast<int>(rng() % (std::min(w, h) / 2 + 1));
    pw = std::min(pw, std::min(w, h));
    if (pw % 2 == 0) --pw;

    ufl::Image img = ufl::make_image(w, h);
    const double denom = static_cast<double>(w) * h;
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) img.at(x, y) = (y * static_cast<double>(w) + x) / denom;

    ufl::PatchBatch b = ufl::extract_random_patches({img}, pw, 50, trial);
    for (int i = 0; i < b.count; ++i) {
      const double* p = b.patch(i);
      long idx = std::lround(p[0] * denom);
      int x0 = static_cast<int>(idx % w);
      int y0 = static_cast<int>(idx / w);
      REQUIRE(x0 + pw <= w);
      REQUIRE(y0 + pw <= h);
      for (int dy = 0; dy < pw; ++dy)
        for (int dx = 0; dx < pw; ++dx)
          CHECK(p[dy * pw + dx] == img.at(x0 + dx, y0 + dy));
    }
  }
}

TEST_CASE("normalize_patches") {
  const double kReg = 10.0 / (255.0 * 255.0);

  SUBCASE("constant patch becomes exactly zero") {
    std::vector<double> p(9, 0.5);
    ufl::normalize_patch(p.data(), 9);
    for (double v : p) CHECK(v == 0.0);
  }

  SUBCASE("two-pixel patch centers then rescales") {
    std::vector<double> p = {0.0, 1.0};
    ufl::normalize_patch(p.data(), 2);
    double scale = std::sqrt(0.25 + kReg);
    CHECK(p[0] == doctest::Approx(-0.5 / scale).epsilon(1e-14));
    CHECK(p[1] == doctest::Approx(0.5 / scale).epsilon(1e-14));
    CHECK(p[0] + p[1] == doctest::Approx(0.0).epsilon(1e-15));
  }

  SUBCASE("random batch has zero-mean patches") {
    ufl::Image img = noise_image(40, 40, 21);
    ufl::PatchBatch b = ufl::extract_random_patches({img}, 7, 200, 3);
    ufl::normalize_patches(b);
    for (int i = 0; i < b.count; ++i) {
      double mean = 0.0;
      for (int j = 0; j < b.dim; ++j) mean += b.patch(i)[j];
      mean /= b.dim;
      CHECK(std::abs(mean) <= 1e-9);
    }
  }

  SUBCASE("second application only rescales by the predicted factor") {
    ufl::Image img = noise_image(30, 30, 22);
    ufl::PatchBatch b = ufl::extract_random_patches({img}, 5, 50, 4);
    ufl::normalize_patches(b);
    ufl::PatchBatch twice = b;
    ufl::normalize_patches(twice);
    for (int i = 0; i < b.count; ++i) {
      double var = 0.0;
      for (int j = 0; j < b.dim; ++j) var += b.patch(i)[j] * b.patch(i)[j];
      var /= b.dim;  // mean is already zero
      double factor = 1.0 / std::sqrt(var + kReg);
      for (int j = 0; j < b.dim; ++j) {
        CHECK(twice.patch(i)[j] ==
              doctest::Approx(b.patch(i)[j] * factor).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("fit_whitening on hand-built covariances") {
  SUBCASE("identity covariance gives identity map") {
    ufl::PatchBatch b;
    b.count = 4;
    b.dim = 2;
    b.patch_width = 1;
    double s = std::sqrt(2.0);
    b.data = {s, 0.0, -s, 0.0, 0.0, s, 0.0, -s};
    ufl::WhiteningTransform t = ufl::fit_whitening(b, 0.0);
    REQUIRE(t.dim == 2);
    CHECK(t.matrix[0] == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(t.matrix[3] == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(std::abs(t.matrix[1]) <= 1e-9);
    CHECK(std::abs(t.matrix[2]) <= 1e-9);
    CHECK(t.mean[0] == doctest::Approx(0.0));
    CHECK(t.mean[1] == doctest::Approx(0.0));
  }

  SUBCASE("diag(4,1) covariance gives diag(0.5,1)") {
    ufl::PatchBatch b;
    b.count = 4;
    b.dim = 2;
    b.patch_width = 1;
    double a = std::sqrt(8.0), c = std::sqrt(2.0);
    b.data = {a, 0.0, -a, 0.0, 0.0, c, 0.0, -c};
    ufl::WhiteningTransform t = ufl::fit_whitening(b, 0.0);
    CHECK(t.matrix[0] == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(t.matrix[3] == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(std::abs(t.matrix[1]) <= 1e-9);
    CHECK(std::abs(t.matrix[2]) <= 1e-9);
  }
}

TEST_CASE("whitening on a random batch") {
  ufl::Image img = noise_image(60, 60, 31);
  ufl::PatchBatch b = ufl::extract_random_patches({img}, 5, 800, 9);
  ufl::normalize_patches(b);

  Eigen::MatrixXd cov_before = batch_covariance(b);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> before(cov_before);
  REQUIRE(before.info() == Eigen::Success);

  const double eps = 0.1;
  ufl::WhiteningTransform t = ufl::fit_whitening(b, eps);
  CHECK(t.epsilon == eps);

  // The map is symmetric.
  for (int i = 0; i < t.dim; ++i)
    for (int j = 0; j < t.dim; ++j)
      CHECK(t.matrix[i * t.dim + j] ==
            doctest::Approx(t.matrix[j * t.dim + i]).epsilon(1e-9));

  ufl::PatchBatch w = b;
  ufl::apply_whitening(t, w);
  Eigen::MatrixXd cov_after = batch_covariance(w);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> after(cov_after);
  REQUIRE(after.info() == Eigen::Success);

  // Whitened covariance must equal U diag(lambda/(lambda+eps)) U^T entrywise,
  // with eigenvalues lambda/(lambda+eps).
  for (int i = 0; i < t.dim; ++i) {
    double lam = std::max(0.0, before.eigenvalues()[i]);
    CHECK(after.eigenvalues()[i] == doctest::Approx(lam / (lam + eps)).epsilon(1e-6));
  }
  Eigen::VectorXd shrunk = before.eigenvalues().cwiseMax(0.0);
  for (int i = 0; i < t.dim; ++i) shrunk[i] = shrunk[i] / (shrunk[i] + eps);
  Eigen::MatrixXd expected =
      before.eigenvectors() * shrunk.asDiagonal() * before.eigenvectors().transpose();
  for (int i = 0; i < t.dim; ++i)
    for (int j = 0; j < t.dim; ++j)
      CHECK(std::abs(cov_after(i, j) - expected(i, j)) <= 1e-6);
}

TEST_CASE("apply_whitening edge cases") {
  SUBCASE("identity transform keeps the batch") {
    ufl::WhiteningTransform t = ufl::identity_whitening(4);
    ufl::PatchBatch b;
    b.count = 3;
    b.dim = 4;
    b.patch_width = 2;
    b.data = {1, 2, 3, 4, -1, 0, 0.5, 2, 0, 0, 0, 1};
    ufl::PatchBatch before = b;
    ufl::apply_whitening(t, b);
    CHECK(b.data == before.data);
  }

  SUBCASE("the mean maps to zero") {
    ufl::Image img = noise_image(30, 30, 5);
    ufl::PatchBatch b = ufl::extract_random_patches({img}, 3, 100, 2);
    ufl::WhiteningTransform t = ufl::fit_whitening(b, 0.05);
    std::vector<double> out(t.dim, 99.0);
    ufl::whiten_vector(t, t.mean.data(), out.data());
    for (double v : out) CHECK(std::abs(v) <= 1e-12);
  }

  SUBCASE("dimension mismatch throws") {
    ufl::WhiteningTransform t = ufl::identity_whitening(4);
    ufl::PatchBatch b;
    b.count = 1;
    b.dim = 9;
    b.patch_width = 3;
    b.data.assign(9, 0.0);
    CHECK_THROWS(ufl::apply_whitening(t, b));
  }
}
