#pragma once

#include <vector>

#include "ufl/patches.hpp"

namespace ufl {

// ZCA whitening fitted on a patch batch: y = W (x - mean) with
// W = V (Lambda + eps I)^(-1/2) V^T from the eigendecomposition of the
// sample covariance. `matrix` is dim x dim, row-major.
struct WhiteningTransform {
  int dim = 0;
  double epsilon = 0.0;
  std::vector<double> mean;
  std::vector<double> matrix;
};

WhiteningTransform fit_whitening(const PatchBatch& batch, double epsilon = 0.1);

// W = I, mean = 0; lets the rest of the pipeline treat whitening as always-on.
WhiteningTransform identity_whitening(int dim);

// `scratch` must hold dim doubles; the overload without it allocates one.
void whiten_vector(const WhiteningTransform& t, const double* x, double* out, double* scratch);
void whiten_vector(const WhiteningTransform& t, const double* x, double* out);
void apply_whitening(const WhiteningTransform& t, PatchBatch& batch);

}  // namespace ufl
