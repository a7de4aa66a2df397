#include "ufl/flow_io.hpp"

#include <algorithm>
#include <cstdint>
#include <stdexcept>

#include "ufl/util.hpp"

namespace ufl {

namespace {

void put_u32(std::string& out, std::uint32_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
  out.push_back(static_cast<char>((v >> 16) & 0xff));
  out.push_back(static_cast<char>((v >> 24) & 0xff));
}

void put_i32(std::string& out, std::int32_t v) { put_u32(out, static_cast<std::uint32_t>(v)); }

std::uint32_t get_u32(const std::string& in, std::size_t pos) {
  return static_cast<std::uint32_t>(static_cast<unsigned char>(in[pos])) |
         (static_cast<std::uint32_t>(static_cast<unsigned char>(in[pos + 1])) << 8) |
         (static_cast<std::uint32_t>(static_cast<unsigned char>(in[pos + 2])) << 16) |
         (static_cast<std::uint32_t>(static_cast<unsigned char>(in[pos + 3])) << 24);
}

std::int32_t get_i32(const std::string& in, std::size_t pos) {
  return static_cast<std::int32_t>(get_u32(in, pos));
}

}  // namespace

void save_flow(const FlowField& flow, const std::string& path) {
  std::uint32_t granularity;
  switch (flow.granularity) {
    case FlowGranularity::patch: granularity = 0; break;
    case FlowGranularity::pixel: granularity = 1; break;
    default: throw std::runtime_error("only patch and pixel flows can be saved");
  }
  const std::size_t count = static_cast<std::size_t>(flow.width) * flow.height;
  if (flow.width < 1 || flow.height < 1 || flow.u.size() != count || flow.v.size() != count) {
    throw std::runtime_error("flow field has inconsistent dimensions");
  }

  std::string out;
  out.reserve(20 + count * 8);
  out += "UFLF";
  put_u32(out, 1);
  put_u32(out, granularity);
  put_u32(out, static_cast<std::uint32_t>(flow.width));
  put_u32(out, static_cast<std::uint32_t>(flow.height));
  for (std::size_t i = 0; i < count; ++i) {
    put_i32(out, flow.u[i]);
    put_i32(out, flow.v[i]);
  }
  write_file_atomic(path, out);
}

FlowField load_flow(const std::string& path) {
  const std::string in = read_file(path);
  if (in.size() < 20 || in.compare(0, 4, "UFLF") != 0) {
    throw std::runtime_error("not a flow file (bad magic): " + path);
  }
  const std::uint32_t version = get_u32(in, 4);
  const std::uint32_t granularity = get_u32(in, 8);
  const std::uint32_t width = get_u32(in, 12);
  const std::uint32_t height = get_u32(in, 16);
  if (version != 1) throw std::runtime_error("unsupported flow file version: " + path);
  if (granularity > 1) throw std::runtime_error("unknown flow granularity: " + path);
  if (width < 1 || height < 1 || width > (1u << 24) || height > (1u << 24)) {
    throw std::runtime_error("implausible flow dimensions: " + path);
  }
  const std::size_t count = static_cast<std::size_t>(width) * height;
  if (in.size() != 20 + count * 8) {
    throw std::runtime_error("truncated or oversized flow file: " + path);
  }

  FlowField flow;
  flow.granularity = granularity == 0 ? FlowGranularity::patch : FlowGranularity::pixel;
  flow.width = static_cast<int>(width);
  flow.height = static_cast<int>(height);
  flow.u.resize(count);
  flow.v.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    flow.u[i] = get_i32(in, 20 + i * 8);
    flow.v[i] = get_i32(in, 20 + i * 8 + 4);
  }
  return flow;
}

FlowField upsample_patch_flow(const FlowField& patch_flow, int pool_width, int width, int height) {
  if (patch_flow.granularity != FlowGranularity::patch) {
    throw std::runtime_error("upsampling needs a patch-granularity flow");
  }
  if (pool_width < 1 || width < 1 || height < 1) {
    throw std::runtime_error("invalid upsampling dimensions");
  }

  FlowField out;
  out.granularity = FlowGranularity::pixel;
  out.width = width;
  out.height = height;
  const std::size_t count = static_cast<std::size_t>(width) * height;
  out.u.resize(count);
  out.v.resize(count);
  const bool has_cost = patch_flow.data_cost.size() == patch_flow.u.size();
  if (has_cost) out.data_cost.resize(count);
  for (int y = 0; y < height; ++y) {
    const int pr = std::min(y / pool_width, patch_flow.height - 1);
    for (int x = 0; x < width; ++x) {
      const int pc = std::min(x / pool_width, patch_flow.width - 1);
      const std::size_t p = static_cast<std::size_t>(pr) * patch_flow.width + pc;
      const std::size_t i = static_cast<std::size_t>(y) * width + x;
      out.u[i] = patch_flow.u[p] * pool_width;
      out.v[i] = patch_flow.v[p] * pool_width;
      if (has_cost) out.data_cost[i] = patch_flow.data_cost[p];
    }
  }
  return out;
}

}  // namespace ufl
