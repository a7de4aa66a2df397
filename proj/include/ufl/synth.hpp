#pragma once

#include <cstdint>

#include "ufl/eval.hpp"
#include "ufl/image.hpp"
#include "ufl/matching.hpp"

namespace ufl {

// A generated test/exemplar pair with exact ground truth.
struct SynthPair {
  Image test;
  Image exemplar;
  LabelMap test_labels;
  LabelMap exemplar_labels;
  FlowField true_flow;  // pixel granularity, test -> exemplar
  int du = 0;
  int dv = 0;
  BoundingBox box_test;
  BoundingBox box_exemplar;
};

// Smooth but locally distinctive texture: blurred noise plus low-amplitude
// sinusoids, rescaled to [0, 1].
Image synth_texture(int width, int height, std::uint64_t seed);

// exemplar(q) = test(q - d) with replicate border fill, so the true flow is
// the constant (du, dv). Labels are two rectangles; the exemplar's labels are
// shifted along, out-of-bounds becoming 0.
SynthPair synth_shift_pair(int width, int height, int du, int dv, std::uint64_t seed);

// exemplar = test; zero flow.
SynthPair synth_identity_pair(int width, int height, std::uint64_t seed);

// Two independent noise images; no meaningful correspondence, zero flow kept
// as a placeholder so the artifact layout stays uniform.
SynthPair synth_noise_pair(int width, int height, std::uint64_t seed);

}  // namespace ufl
