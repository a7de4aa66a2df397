#include "ufl/whitening.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <iostream>
#include <stdexcept>

#include "ufl/simd/kernels.hpp"

namespace ufl {

WhiteningTransform fit_whitening(const PatchBatch& batch, double epsilon) {
  const int n = batch.dim;
  const int count = batch.count;
  if (n < 1) throw std::runtime_error("whitening: empty batch");
  if (count < 1) throw std::runtime_error("whitening: need at least one patch");
  if (count <= n) {
    std::cerr << "warning: fitting " << n << "-dim whitening on only " << count
              << " patches; covariance is rank-deficient\n";
  }

  WhiteningTransform t;
  t.dim = n;
  t.epsilon = epsilon;
  t.mean.assign(n, 0.0);
  for (int p = 0; p < count; ++p) {
    const double* x = batch.patch(p);
    for (int i = 0; i < n; ++i) t.mean[i] += x[i];
  }
  for (int i = 0; i < n; ++i) t.mean[i] /= count;

  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd centered(n);
  for (int p = 0; p < count; ++p) {
    const double* x = batch.patch(p);
    for (int i = 0; i < n; ++i) centered[i] = x[i] - t.mean[i];
    cov.selfadjointView<Eigen::Lower>().rankUpdate(centered, 1.0 / count);
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  if (eig.info() != Eigen::Success) throw std::runtime_error("whitening: eigendecomposition failed");
  const Eigen::MatrixXd& v = eig.eigenvectors();
  Eigen::VectorXd inv_sqrt = eig.eigenvalues();
  for (int i = 0; i < n; ++i) {
    const double lam = inv_sqrt[i] < 0.0 ? 0.0 : inv_sqrt[i];  // numerical negatives
    const double denom = lam + epsilon;
    inv_sqrt[i] = denom < 1e-12 ? 0.0 : 1.0 / std::sqrt(denom);
  }
  const Eigen::MatrixXd w = v * inv_sqrt.asDiagonal() * v.transpose();

  t.matrix.resize(static_cast<std::size_t>(n) * n);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) t.matrix[static_cast<std::size_t>(r) * n + c] = w(r, c);
  }
  return t;
}

WhiteningTransform identity_whitening(int dim) {
  if (dim < 1) throw std::runtime_error("whitening: dimension must be positive");
  WhiteningTransform t;
  t.dim = dim;
  t.epsilon = 0.0;
  t.mean.assign(dim, 0.0);
  t.matrix.assign(static_cast<std::size_t>(dim) * dim, 0.0);
  for (int i = 0; i < dim; ++i) t.matrix[static_cast<std::size_t>(i) * dim + i] = 1.0;
  return t;
}

void whiten_vector(const WhiteningTransform& t, const double* x, double* out, double* scratch) {
  for (int i = 0; i < t.dim; ++i) scratch[i] = x[i] - t.mean[i];
  simd::matvec(t.matrix.data(), scratch, out, t.dim, t.dim);
}

void whiten_vector(const WhiteningTransform& t, const double* x, double* out) {
  std::vector<double> scratch(t.dim);
  whiten_vector(t, x, out, scratch.data());
}

void apply_whitening(const WhiteningTransform& t, PatchBatch& batch) {
  if (batch.dim != t.dim) throw std::runtime_error("whitening: dimension mismatch");
  std::vector<double> tmp(t.dim);
  for (int p = 0; p < batch.count; ++p) {
    double* x = batch.patch(p);
    whiten_vector(t, x, tmp.data());
    for (int i = 0; i < t.dim; ++i) x[i] = tmp[i];
  }
}

}  // namespace ufl
