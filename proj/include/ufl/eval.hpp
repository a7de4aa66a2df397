#pragma once

#include <string>
#include <utility>
#include <vector>

#include "ufl/image.hpp"
#include "ufl/matching.hpp"

namespace ufl {

// Per-pixel class ids; 0 means unlabeled.
struct LabelMap {
  int width = 0;
  int height = 0;
  std::vector<int> labels;

  int at(int x, int y) const { return labels[static_cast<std::size_t>(y) * width + x]; }
  int& at(int x, int y) { return labels[static_cast<std::size_t>(y) * width + x]; }
};

struct BoundingBox {
  int x = 0;
  int y = 0;
  int w = 0;
  int h = 0;
};

// o(p) = exemplar_labels(p + t_p); out-of-bounds targets become 0.
LabelMap transfer_labels(const FlowField& flow, const LabelMap& exemplar_labels);

// output(p) = exemplar(p + t_p); out-of-bounds targets become 0.
Image warp_image(const FlowField& flow, const Image& exemplar);

// Label-transfer accuracy pooled over pairs: correct / labeled, counting only
// pixels with truth > 0. Throws when no pixel is labeled anywhere.
double lt_acc(const std::vector<std::pair<const LabelMap*, const LabelMap*>>& output_truth);

// tp / (tp + fp + fn) for one class; 1.0 when the class is absent from both.
double iou(const LabelMap& output, const LabelMap& truth, int class_id);

// Mean over box_test pixels of 0.5(|x1-x2| + |y1-y2|) in box-normalized
// coordinates: the pixel against box_test, its flow target against box_ex.
double loc_err(const FlowField& flow, const BoundingBox& box_test, const BoundingBox& box_ex);

// Label maps as P5 PGM with gray value = label id (maxval 255).
LabelMap load_label_pgm(const std::string& path);
void save_label_pgm(const LabelMap& labels, const std::string& path);

}  // namespace ufl
