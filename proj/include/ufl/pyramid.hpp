#pragma once

#include <utility>
#include <vector>

#include "ufl/encode.hpp"

namespace ufl {

// One pyramid cell; patches are indices into the row-major patch grid.
struct GridCell {
  int level = 0;
  int cx = 0;
  int cy = 0;
  std::vector<int> patches;    // row-major order
  double qx = 0.0;             // centroid of member patches, patch units
  double qy = 0.0;
  int parent = -1;             // cell index, -1 for the root
  std::vector<int> children;   // cell indices on the next finer level
  std::vector<int> neighbors;  // 4-neighbors on the same level
  int patch_count() const { return static_cast<int>(patches.size()); }
};

// Level l holds 2^l x 2^l cells; level 0 is the whole grid. Patch (c, r) on a
// cols x rows grid belongs to cell (c*k/cols, r*k/rows) at a level with k
// cells per side, so the levels nest exactly.
struct GridCellPyramid {
  int levels = 0;
  int patch_cols = 0;
  int patch_rows = 0;
  std::vector<GridCell> cells;             // level-major, row-major within level
  std::vector<int> level_offset;           // size levels + 1
  std::vector<std::pair<int, int>> edges;  // unique undirected: neighbor + parent-child

  int cells_per_side(int level) const { return 1 << level; }
  int cell_index(int level, int cx, int cy) const {
    return level_offset[level] + cy * cells_per_side(level) + cx;
  }
};

GridCellPyramid build_grid_pyramid(const PatchFeatureMap& pf, int levels);

}  // namespace ufl
