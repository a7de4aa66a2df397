#include "ufl/eval.hpp"

#include <cctype>
#include <cmath>
#include <stdexcept>

#include "ufl/util.hpp"

namespace ufl {

namespace {

void check_pixel_flow(const FlowField& flow) {
  if (flow.granularity != FlowGranularity::pixel) {
    throw std::runtime_error("label transfer needs a pixel-granularity flow");
  }
  const std::size_t count = static_cast<std::size_t>(flow.width) * flow.height;
  if (flow.width < 1 || flow.height < 1 || flow.u.size() != count || flow.v.size() != count) {
    throw std::runtime_error("flow field has inconsistent dimensions");
  }
}

}  // namespace

LabelMap transfer_labels(const FlowField& flow, const LabelMap& exemplar_labels) {
  check_pixel_flow(flow);
  LabelMap out;
  out.width = flow.width;
  out.height = flow.height;
  out.labels.assign(static_cast<std::size_t>(flow.width) * flow.height, 0);
  for (int y = 0; y < flow.height; ++y) {
    for (int x = 0; x < flow.width; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * flow.width + x;
      const int tx = x + flow.u[i];
      const int ty = y + flow.v[i];
      if (tx >= 0 && tx < exemplar_labels.width && ty >= 0 && ty < exemplar_labels.height) {
        out.labels[i] = exemplar_labels.at(tx, ty);
      }
    }
  }
  return out;
}

Image warp_image(const FlowField& flow, const Image& exemplar) {
  check_pixel_flow(flow);
  Image out = make_image(flow.width, flow.height, 0.0);
  for (int y = 0; y < flow.height; ++y) {
    for (int x = 0; x < flow.width; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * flow.width + x;
      const int tx = x + flow.u[i];
      const int ty = y + flow.v[i];
      if (tx >= 0 && tx < exemplar.width && ty >= 0 && ty < exemplar.height) {
        out.data[i] = exemplar.at(tx, ty);
      }
    }
  }
  return out;
}

double lt_acc(const std::vector<std::pair<const LabelMap*, const LabelMap*>>& output_truth) {
  long long correct = 0;
  long long labeled = 0;
  for (const auto& [output, truth] : output_truth) {
    if (output == nullptr || truth == nullptr) throw std::runtime_error("null label map");
    if (output->width != truth->width || output->height != truth->height) {
      throw std::runtime_error("label map dimensions differ within a pair");
    }
    for (std::size_t i = 0; i < truth->labels.size(); ++i) {
      if (truth->labels[i] > 0) {
        ++labeled;
        if (output->labels[i] == truth->labels[i]) ++correct;
      }
    }
  }
  if (labeled == 0) throw std::runtime_error("LT-ACC undefined: no labeled pixels");
  return static_cast<double>(correct) / static_cast<double>(labeled);
}

double iou(const LabelMap& output, const LabelMap& truth, int class_id) {
  if (output.width != truth.width || output.height != truth.height) {
    throw std::runtime_error("label map dimensions differ");
  }
  long long tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < truth.labels.size(); ++i) {
    const bool in_out = output.labels[i] == class_id;
    const bool in_truth = truth.labels[i] == class_id;
    if (in_out && in_truth) ++tp;
    else if (in_out) ++fp;
    else if (in_truth) ++fn;
  }
  if (tp + fp + fn == 0) return 1.0;  // class absent from both maps
  return static_cast<double>(tp) / static_cast<double>(tp + fp + fn);
}

double loc_err(const FlowField& flow, const BoundingBox& box_test, const BoundingBox& box_ex) {
  check_pixel_flow(flow);
  if (box_test.w < 1 || box_test.h < 1 || box_ex.w < 1 || box_ex.h < 1) {
    throw std::runtime_error("empty bounding box");
  }
  if (box_test.x < 0 || box_test.y < 0 || box_test.x + box_test.w > flow.width ||
      box_test.y + box_test.h > flow.height) {
    throw std::runtime_error("test box extends outside the flow field");
  }

  double sum = 0.0;
  for (int y = box_test.y; y < box_test.y + box_test.h; ++y) {
    for (int x = box_test.x; x < box_test.x + box_test.w; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * flow.width + x;
      const double x1 = static_cast<double>(x - box_test.x) / box_test.w;
      const double y1 = static_cast<double>(y - box_test.y) / box_test.h;
      const double x2 = static_cast<double>(x + flow.u[i] - box_ex.x) / box_ex.w;
      const double y2 = static_cast<double>(y + flow.v[i] - box_ex.y) / box_ex.h;
      sum += 0.5 * (std::abs(x1 - x2) + std::abs(y1 - y2));
    }
  }
  return sum / (static_cast<double>(box_test.w) * box_test.h);
}

LabelMap load_label_pgm(const std::string& path) {
  const std::string bytes = read_file(path);
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5') {
    throw std::runtime_error("label map must be a binary PGM (P5): " + path);
  }
  std::size_t pos = 2;
  auto next_int = [&bytes, &pos, &path]() {
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
      throw std::runtime_error("malformed PGM header: " + path);
    }
    long v = 0;
    while (pos < bytes.size() && std::isdigit(static_cast<unsigned char>(bytes[pos]))) {
      v = v * 10 + (bytes[pos] - '0');
      if (v > 1 << 30) throw std::runtime_error("PGM header value out of range: " + path);
      ++pos;
    }
    return static_cast<int>(v);
  };
  const int width = next_int();
  const int height = next_int();
  const int maxval = next_int();
  if (width < 1 || height < 1) throw std::runtime_error("zero-dimension label map: " + path);
  if (maxval != 255) throw std::runtime_error("label PGM must have maxval 255: " + path);
  ++pos;
  const std::size_t count = static_cast<std::size_t>(width) * height;
  if (bytes.size() - pos < count) throw std::runtime_error("truncated label PGM: " + path);

  LabelMap out;
  out.width = width;
  out.height = height;
  out.labels.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    out.labels[i] = static_cast<unsigned char>(bytes[pos + i]);
  }
  return out;
}

void save_label_pgm(const LabelMap& labels, const std::string& path) {
  if (labels.width < 1 || labels.height < 1 ||
      labels.labels.size() != static_cast<std::size_t>(labels.width) * labels.height) {
    throw std::runtime_error("label map has inconsistent dimensions");
  }
  std::string out = "P5\n" + std::to_string(labels.width) + " " + std::to_string(labels.height) +
                    "\n255\n";
  out.reserve(out.size() + labels.labels.size());
  for (const int v : labels.labels) {
    if (v < 0 || v > 255) throw std::runtime_error("label id outside the PGM range 0..255");
    out.push_back(static_cast<char>(static_cast<unsigned char>(v)));
  }
  write_file_atomic(path, out);
}

}  // namespace ufl
