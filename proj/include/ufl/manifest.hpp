#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ufl/eval.hpp"

namespace ufl {

// One dataset row: image paths (already resolved to absolute/relative-to-cwd
// form at load time) plus optional label maps and LOC-ERR boxes.
struct PairEntry {
  std::string test;
  std::string exemplar;
  std::string test_labels;      // empty if absent
  std::string exemplar_labels;  // empty if absent
  std::optional<BoundingBox> box_test;
  std::optional<BoundingBox> box_exemplar;
};

struct PairManifest {
  std::vector<PairEntry> pairs;
};

// "x:y:w:h" or "x,y,w,h" depending on sep.
BoundingBox parse_box(const std::string& text, char sep);

// CSV with columns test,exemplar,test_labels,ex_labels,box_test,box_ex.
// Boxes are x:y:w:h; trailing columns may be omitted or empty. A header row
// (first cell "test") is skipped. Relative paths resolve against the manifest
// directory; every referenced file must exist.
PairManifest load_manifest(const std::string& path);

void save_manifest(const PairManifest& manifest, const std::string& path);

}  // namespace ufl
