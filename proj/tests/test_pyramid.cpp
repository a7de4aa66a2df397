#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <set>
#include <vector>

#include "ufl/pyramid.hpp"

namespace {

ufl::PatchFeatureMap grid(int cols, int rows) {
  ufl::PatchFeatureMap pf;
  pf.cols = cols;
  pf.rows = rows;
  pf.dim = 1;
  pf.data.assign(static_cast<std::size_t>(cols) * rows, 0.0);
  return pf;
}

}  // namespace

TEST_CASE("single-level pyramid is one cell with every patch and no edges") {
  ufl::GridCellPyramid pyr = ufl::build_grid_pyramid(grid(5, 3), 1);
  REQUIRE(pyr.levels == 1);
  REQUIRE(pyr.cells.size() == 1);
  CHECK(pyr.edges.empty());
  const ufl::GridCell& root = pyr.cells[0];
  CHECK(root.patch_count() == 15);
  CHECK(root.parent == -1);
  CHECK(root.children.empty());
  CHECK(root.neighbors.empty());
  for (int i = 0; i < 15; ++i) CHECK(root.patches[i] == i);
  // Centroid of a 5x3 grid of unit-spaced patches.
  CHECK(root.qx == doctest::Approx(2.0));
  CHECK(root.qy == doctest::Approx(1.0));
}

TEST_CASE("4x4 grid with three levels splits 1/4/16") {
  ufl::GridCellPyramid pyr = ufl::build_grid_pyramid(grid(4, 4), 3);
  REQUIRE(pyr.levels == 3);
  REQUIRE(pyr.level_offset.size() == 4);
  CHECK(pyr.level_offset[0] == 0);
  CHECK(pyr.level_offset[1] == 1);
  CHECK(pyr.level_offset[2] == 5);
  CHECK(pyr.level_offset[3] == 21);
  CHECK(pyr.cells.size() == 21);

  // Every leaf holds exactly one patch.
  for (int i = pyr.level_offset[2]; i < pyr.level_offset[3]; ++i) {
    CHECK(pyr.cells[i].patch_count() == 1);
  }
  // Leaf at cell coordinates (cx, cy) holds patch cy*4+cx.
  for (int cy = 0; cy < 4; ++cy) {
    for (int cx = 0; cx < 4; ++cx) {
      const ufl::GridCell& cell = pyr.cells[pyr.cell_index(2, cx, cy)];
      CHECK(cell.patches[0] == cy * 4 + cx);
      CHECK(cell.qx == doctest::Approx(cx));
      CHECK(cell.qy == doctest::Approx(cy));
    }
  }
  // Level-1 cells hold 4 patches each.
  for (int i = pyr.level_offset[1]; i < pyr.level_offset[2]; ++i) {
    CHECK(pyr.cells[i].patch_count() == 4);
    CHECK(pyr.cells[i].parent == 0);
    CHECK(pyr.cells[i].children.size() == 4);
  }
  CHECK(pyr.cells[0].patch_count() == 16);
}

TEST_CASE("6x6 grid with two levels uses the proportional floor rule") {
  ufl::GridCellPyramid pyr = ufl::build_grid_pyramid(grid(6, 6), 2);
  REQUIRE(pyr.cells.size() == 5);
  for (int cy = 0; cy < 2; ++cy) {
    for (int cx = 0; cx < 2; ++cx) {
      const ufl::GridCell& cell = pyr.cells[pyr.cell_index(1, cx, cy)];
      CHECK(cell.patch_count() == 9);
      // Membership: patch (c, r) belongs to cell (c*2/6, r*2/6).
      for (int p : cell.patches) {
        int c = p % 6, r = p / 6;
        CHECK(c * 2 / 6 == cx);
        CHECK(r * 2 / 6 == cy);
      }
    }
  }
}

TEST_CASE("uneven grids still partition every level") {
  for (auto [cols, rows, levels] : {std::tuple{7, 5, 3}, std::tuple{9, 4, 3},
                                    std::tuple{5, 5, 2}, std::tuple{13, 11, 3}}) {
    ufl::GridCellPyramid pyr = ufl::build_grid_pyramid(grid(cols, rows), levels);
    for (int l = 0; l < levels; ++l) {
      std::set<int> seen;
      int count = 0;
      for (int i = pyr.level_offset[l]; i < pyr.level_offset[l + 1]; ++i) {
        const ufl::GridCell& cell = pyr.cells[i];
        CHECK(cell.level == l);
        CHECK(cell.patch_count() >= 1);
        // Patch list is sorted (row-major order).
        CHECK(std::is_sorted(cell.patches.begin(), cell.patches.end()));
        for (int p : cell.patches) {
          CHECK(seen.insert(p).second);  // no patch in two cells of one level
          ++count;
        }
      }
      CHECK(count == cols * rows);
    }
  }
}

TEST_CASE("children nest inside parents") {
  ufl::GridCellPyramid pyr = ufl::build_grid_pyramid(grid(9, 7), 3);
  for (std::size_t i = 0; i < pyr.cells.size(); ++i) {
    const ufl::GridCell& cell = pyr.cells[i];
    if (cell.parent >= 0) {
      const ufl::GridCell& par = pyr.cells[cell.parent];
      CHECK(par.level == cell.level - 1);
      // Child patch set is a subset of the parent's.
      CHECK(std::includes(par.patches.begin(), par.patches.end(), cell.patches.begin(),
                          cell.patches.end()));
      // The parent lists this cell as a child.
      CHECK(std::find(par.children.begin(), par.children.end(), static_cast<int>(i)) !=
            par.children.end());
    } else {
      CHECK(cell.level == 0);
    }
  }
}

TEST_CASE("neighbor links are 4-connected within each level") {
  ufl::GridCellPyramid pyr = ufl::build_grid_pyramid(grid(8, 8), 3);
  for (int l = 0; l < 3; ++l) {
    int k = pyr.cells_per_side(l);
    for (int cy = 0; cy < k; ++cy) {
      for (int cx = 0; cx < k; ++cx) {
        const ufl::GridCell& cell = pyr.cells[pyr.cell_index(l, cx, cy)];
        std::set<int> want;
        if (cx > 0) want.insert(pyr.cell_index(l, cx - 1, cy));
        if (cx + 1 < k) want.insert(pyr.cell_index(l, cx + 1, cy));
        if (cy > 0) want.insert(pyr.cell_index(l, cx, cy - 1));
        if (cy + 1 < k) want.insert(pyr.cell_index(l, cx, cy + 1));
        CHECK(std::set<int>(cell.neighbors.begin(), cell.neighbors.end()) == want);
      }
    }
  }
}

TEST_CASE("edge list is unique and covers neighbors plus parent-child pairs") {
  ufl::GridCellPyramid pyr = ufl::build_grid_pyramid(grid(6, 6), 3);
  std::set<std::pair<int, int>> edges;
  for (auto [a, b] : pyr.edges) {
    REQUIRE(a >= 0);
    REQUIRE(b >= 0);
    REQUIRE(a != b);
    std::pair<int, int> key{std::min(a, b), std::max(a, b)};
    CHECK(edges.insert(key).second);
  }
  // 3 levels: neighbor edges 0 + 4 + 24, parent-child 4 + 16.
  CHECK(pyr.edges.size() == 0 + 4 + 24 + 4 + 16);

  std::size_t from_links = 0;
  for (std::size_t i = 0; i < pyr.cells.size(); ++i) {
    for (int nb : pyr.cells[i].neighbors) {
      if (static_cast<int>(i) < nb) {
        auto key = std::make_pair(static_cast<int>(i), nb);
        CHECK(edges.count(key) == 1);
        ++from_links;
      }
    }
    for (int ch : pyr.cells[i].children) {
      std::pair<int, int> key{std::min(static_cast<int>(i), ch),
                              std::max(static_cast<int>(i), ch)};
      CHECK(edges.count(key) == 1);
      ++from_links;
    }
  }
  CHECK(from_links == pyr.edges.size());
}

TEST_CASE("error cases") {
  CHECK_THROWS(ufl::build_grid_pyramid(grid(4, 4), 0));
  // levels=3 needs at least 4 patches per side.
  CHECK_THROWS(ufl::build_grid_pyramid(grid(3, 8), 3));
  CHECK_THROWS(ufl::build_grid_pyramid(grid(8, 3), 3));
  CHECK_NOTHROW(ufl::build_grid_pyramid(grid(4, 4), 3));
  ufl::PatchFeatureMap empty;
  CHECK_THROWS(ufl::build_grid_pyramid(empty, 1));
}
