#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "ufl/encode.hpp"
#include "ufl/image.hpp"
#include "ufl/pyramid.hpp"

namespace ufl {

struct MatchParams {
  double alpha = 0.02;       // smoothness weight
  double gamma = 0.5;        // smoothness truncation, translation-grid steps
  double lambda = 0.0;       // data truncation; <= 0 means estimate from the data
  int bp_iters = 20;
  int levels = 3;
  int candidate_stride = 1;  // translation grid step, patch units
  int pixel_radius = -1;     // pixel-layer search radius; < 0 means pool_width
  bool pixel_layer = false;
  int lambda_sample = 10000;
  std::uint64_t seed = 0;    // lambda-estimation sampling
};

// Integer translation lattice {(su*stride, sv*stride)} clipped to inclusive
// bounds; contains (0,0) whenever the requested ranges straddle zero.
struct TranslationDomain {
  int stride = 1;
  int su_min = 0, su_max = 0;  // inclusive, in steps
  int sv_min = 0, sv_max = 0;

  int u_count() const { return su_max - su_min + 1; }
  int v_count() const { return sv_max - sv_min + 1; }
  int size() const { return u_count() * v_count(); }
  int u_at(int iu) const { return (su_min + iu) * stride; }
  int v_at(int iv) const { return (sv_min + iv) * stride; }
  // Row-major label index: iv * u_count + iu.
  int u_of_label(int label) const { return u_at(label % u_count()); }
  int v_of_label(int label) const { return v_at(label / u_count()); }
  bool contains(int u, int v) const;
  int label_of(int u, int v) const;  // -1 if (u, v) is not a lattice point
};

TranslationDomain make_domain(int u_min, int u_max, int v_min, int v_max, int stride = 1);
// Every translation that maps at least one test patch into the exemplar grid.
TranslationDomain full_translation_domain(int test_cols, int test_rows, int ex_cols, int ex_rows,
                                          int stride = 1);

enum class FlowGranularity { cell, patch, pixel };

// Per-node integer translation plus the data cost of the chosen label.
// Cell-granularity fields are flat over pyramid cells (width = count,
// height = 1); patch/pixel granularity is a row-major grid.
struct FlowField {
  FlowGranularity granularity = FlowGranularity::patch;
  int width = 0;
  int height = 0;
  std::vector<int> u, v;
  std::vector<double> data_cost;
  std::size_t size() const { return u.size(); }
};

// Mean L1 feature distance over sampled (test, exemplar) node pairs;
// exhaustive when the total number of pairs is at most `sample`.
double estimate_lambda(const PatchFeatureMap& test, const PatchFeatureMap& exemplar,
                       int sample = 10000, std::uint64_t seed = 0);
double estimate_lambda(const PixelFeatureMap& test, const PixelFeatureMap& exemplar,
                       int sample = 10000, std::uint64_t seed = 0);

// Mean over the cell's patches of the L1 feature distance under a rigid cell
// translation (out-of-bounds patches contribute lambda each), truncated at
// lambda: min(sum/z, lambda).
double cell_data_term(const GridCell& cell, int u, int v, const PatchFeatureMap& test,
                      const PatchFeatureMap& exemplar, double lambda);

// min(|u_i - u_j| + |v_i - v_j|, gamma).
double smoothness_term(int ui, int vi, int uj, int vj, double gamma);

// m(t) = min_{t'} [h(t') + alpha * min(||t - t'||_1, gamma)] over a
// u_count x v_count label grid (L1 measured in grid steps), computed with a
// two-pass distance transform and a pointwise cap at min(h) + alpha * gamma.
std::vector<double> dt_message(const std::vector<double>& h, int u_count, int v_count,
                               double alpha, double gamma);

// A generic pairwise MRF over a shared translation domain: per-node data
// costs plus alpha * min(step-L1, gamma) on each undirected edge.
struct MrfProblem {
  TranslationDomain domain;
  std::vector<std::vector<double>> data;    // one cost vector per node
  std::vector<std::pair<int, int>> edges;   // undirected node pairs
};

struct MrfSolution {
  std::vector<int> labels;       // label indices into the domain
  double energy = 0.0;           // of `labels`
  double energy_zero = 0.0;      // all-zeros labeling; +inf if 0 not in domain
  double energy_argmin = 0.0;    // independent per-node argmin labeling
};

double labeling_energy(const MrfProblem& problem, const std::vector<int>& labels, double alpha,
                       double gamma);

// Synchronous min-sum loopy BP with min-normalized messages and distance-
// transform message updates. The returned labeling is the best-energy one
// among the BP beliefs, the all-zeros labeling, and the independent argmin,
// so its energy never exceeds either baseline.
MrfSolution solve_mrf_bp(const MrfProblem& problem, double alpha, double gamma, int bp_iters);

// Raw per-patch costs for every (patch, translation): L1 feature distance for
// in-bounds targets, lambda for out-of-bounds ones.
struct PatchCostTable {
  int patch_count = 0;
  int t_count = 0;
  std::vector<double> cost;
  double at(int patch, int label) const {
    return cost[static_cast<std::size_t>(patch) * t_count + label];
  }
};

PatchCostTable build_patch_cost_table(const PatchFeatureMap& test, const PatchFeatureMap& exemplar,
                                      const TranslationDomain& domain, double lambda);

struct GridLayerResult {
  FlowField flow;  // one entry per pyramid cell, all levels
  double energy = 0.0;
  double energy_zero = 0.0;
  double energy_argmin = 0.0;
};

// Joint BP solve over the whole pyramid graph. params.lambda must be set.
// `table` may share a precomputed cost table; pass nullptr to build one.
GridLayerResult solve_grid_layer(const GridCellPyramid& pyr, const PatchFeatureMap& test,
                                 const PatchFeatureMap& exemplar, const TranslationDomain& domain,
                                 const MatchParams& params,
                                 const PatchCostTable* table = nullptr);

// Per-patch independent refinement against the finest-level parent cell:
// argmin over the domain of min(L1, lambda) + alpha * min(step-L1 to the
// parent's translation, gamma).
FlowField solve_patch_layer(const GridCellPyramid& pyr, const FlowField& cell_flow,
                            const PatchFeatureMap& test, const PatchFeatureMap& exemplar,
                            const TranslationDomain& domain, const MatchParams& params,
                            const PatchCostTable* table = nullptr);

// Per-pixel refinement in a +-radius window around the parent patch's
// translation (converted to pixel units); gamma scales by pool_width.
// radius = 0 degenerates to upsampling the patch flow.
FlowField solve_pixel_layer(const FlowField& patch_flow, const PixelFeatureMap& test,
                            const PixelFeatureMap& exemplar, const MatchParams& params, int radius,
                            int pool_width);

struct MatchStageTimes {
  double encode_ms = 0.0;
  double pool_ms = 0.0;
  double grid_ms = 0.0;
  double patch_ms = 0.0;
  double pixel_ms = 0.0;
};

struct MatchResult {
  FlowField patch_flow;
  std::optional<FlowField> pixel_flow;
  double grid_energy = 0.0;
  double grid_energy_zero = 0.0;
  double grid_energy_argmin = 0.0;
  double lambda_patch = 0.0;
  double lambda_pixel = 0.0;
  MatchStageTimes times;
};

// Full pipeline: encode both images, pool, build the pyramid, solve the grid
// and patch layers, and optionally refine per pixel.
MatchResult match(const Image& test, const Image& exemplar, const Dictionary& dict,
                  const EncoderConfig& cfg, const MatchParams& params);

}  // namespace ufl
