#pragma once

#include <string>

#include "ufl/matching.hpp"

namespace ufl {

// Binary flow file, little-endian: "UFLF", u32 version = 1, u32 granularity
// (0 = patch, 1 = pixel), u32 width, u32 height, then width*height (i32 u,
// i32 v) pairs row-major. Cell-granularity fields are in-process only.
void save_flow(const FlowField& flow, const std::string& path);
FlowField load_flow(const std::string& path);

// Replicates each patch translation (scaled to pixel units) over its pooling
// tile; pixels beyond the last full tile use the nearest patch.
FlowField upsample_patch_flow(const FlowField& patch_flow, int pool_width, int width, int height);

}  // namespace ufl
