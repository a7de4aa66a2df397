#include "ufl/pyramid.hpp"

#include <stdexcept>

namespace ufl {

GridCellPyramid build_grid_pyramid(const PatchFeatureMap& pf, int levels) {
  if (levels < 1) throw std::runtime_error("pyramid needs at least one level");
  const int cols = pf.cols;
  const int rows = pf.rows;
  const int leaf_side = 1 << (levels - 1);
  if (cols < leaf_side || rows < leaf_side) {
    throw std::runtime_error("patch grid too small: every cell on the finest level needs a patch");
  }

  GridCellPyramid pyr;
  pyr.levels = levels;
  pyr.patch_cols = cols;
  pyr.patch_rows = rows;
  pyr.level_offset.resize(levels + 1);
  int total = 0;
  for (int l = 0; l < levels; ++l) {
    pyr.level_offset[l] = total;
    total += (1 << l) * (1 << l);
  }
  pyr.level_offset[levels] = total;
  pyr.cells.resize(total);

  for (int l = 0; l < levels; ++l) {
    const int side = 1 << l;
    for (int cy = 0; cy < side; ++cy) {
      for (int cx = 0; cx < side; ++cx) {
        GridCell& cell = pyr.cells[pyr.cell_index(l, cx, cy)];
        cell.level = l;
        cell.cx = cx;
        cell.cy = cy;
      }
    }
  }

  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const int patch = r * cols + c;
      for (int l = 0; l < levels; ++l) {
        const int side = 1 << l;
        const int cx = c * side / cols;
        const int cy = r * side / rows;
        pyr.cells[pyr.cell_index(l, cx, cy)].patches.push_back(patch);
      }
    }
  }

  for (GridCell& cell : pyr.cells) {
    double sx = 0.0, sy = 0.0;
    for (const int p : cell.patches) {
      sx += p % cols;
      sy += p / cols;
    }
    if (!cell.patches.empty()) {
      cell.qx = sx / cell.patch_count();
      cell.qy = sy / cell.patch_count();
    }
  }

  for (int l = 0; l < levels; ++l) {
    const int side = 1 << l;
    for (int cy = 0; cy < side; ++cy) {
      for (int cx = 0; cx < side; ++cx) {
        const int me = pyr.cell_index(l, cx, cy);
        if (cx + 1 < side) {
          const int right = pyr.cell_index(l, cx + 1, cy);
          pyr.cells[me].neighbors.push_back(right);
          pyr.cells[right].neighbors.push_back(me);
          pyr.edges.emplace_back(me, right);
        }
        if (cy + 1 < side) {
          const int down = pyr.cell_index(l, cx, cy + 1);
          pyr.cells[me].neighbors.push_back(down);
          pyr.cells[down].neighbors.push_back(me);
          pyr.edges.emplace_back(me, down);
        }
        if (l > 0) {
          const int parent = pyr.cell_index(l - 1, cx / 2, cy / 2);
          pyr.cells[me].parent = parent;
          pyr.cells[parent].children.push_back(me);
          pyr.edges.emplace_back(parent, me);
        }
      }
    }
  }
  return pyr;
}

}  // namespace ufl
