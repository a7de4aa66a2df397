#include "ufl/matching.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "ufl/simd/kernels.hpp"
#include "ufl/util.hpp"

namespace ufl {

namespace {

int floor_div(int a, int b) { return a >= 0 ? a / b : -((-a + b - 1) / b); }
int ceil_div(int a, int b) { return a >= 0 ? (a + b - 1) / b : -((-a) / b); }

double lambda_floor(double estimate) { return std::max(estimate, 1e-6); }

double estimate_lambda_raw(const double* test, int test_count, const double* ex, int ex_count,
                           int dim, int sample, std::uint64_t seed) {
  if (test_count < 1 || ex_count < 1) throw std::runtime_error("lambda: empty feature map");
  if (dim < 1) throw std::runtime_error("lambda: empty features");
  if (sample < 1) throw std::runtime_error("lambda: sample count must be positive");

  const std::uint64_t total =
      static_cast<std::uint64_t>(test_count) * static_cast<std::uint64_t>(ex_count);
  double sum = 0.0;
  if (total <= static_cast<std::uint64_t>(sample)) {
    for (int i = 0; i < test_count; ++i) {
      for (int j = 0; j < ex_count; ++j) {
        sum += simd::l1_dist(test + static_cast<std::size_t>(i) * dim,
                             ex + static_cast<std::size_t>(j) * dim, dim);
      }
    }
    return sum / static_cast<double>(total);
  }
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick_t(0, test_count - 1);
  std::uniform_int_distribution<int> pick_e(0, ex_count - 1);
  for (int s = 0; s < sample; ++s) {
    const int i = pick_t(rng);
    const int j = pick_e(rng);
    sum += simd::l1_dist(test + static_cast<std::size_t>(i) * dim,
                         ex + static_cast<std::size_t>(j) * dim, dim);
  }
  return sum / sample;
}

struct Candidate {
  double cost = std::numeric_limits<double>::infinity();
  double data = 0.0;
  int u = 0, v = 0;
  int t_l1 = 0;
  bool valid = false;

  // Lowest cost, then smallest ||t||_1, then first offered (scan order).
  void offer(double c, double d, int cu, int cv) {
    const int l1 = std::abs(cu) + std::abs(cv);
    if (!valid || c < cost || (c == cost && l1 < t_l1)) {
      cost = c;
      data = d;
      u = cu;
      v = cv;
      t_l1 = l1;
      valid = true;
    }
  }
};

void check_params(const MatchParams& params) {
  if (params.alpha < 0.0) throw std::runtime_error("alpha must be non-negative");
  if (params.gamma <= 0.0) throw std::runtime_error("gamma must be positive");
  if (params.bp_iters < 1) throw std::runtime_error("bp_iters must be at least 1");
}

}  // namespace

bool TranslationDomain::contains(int u, int v) const {
  if (u % stride != 0 || v % stride != 0) return false;
  const int su = u / stride, sv = v / stride;
  return su >= su_min && su <= su_max && sv >= sv_min && sv <= sv_max;
}

int TranslationDomain::label_of(int u, int v) const {
  if (!contains(u, v)) return -1;
  return (v / stride - sv_min) * u_count() + (u / stride - su_min);
}

TranslationDomain make_domain(int u_min, int u_max, int v_min, int v_max, int stride) {
  if (stride < 1) throw std::runtime_error("translation stride must be positive");
  TranslationDomain d;
  d.stride = stride;
  d.su_min = ceil_div(u_min, stride);
  d.su_max = floor_div(u_max, stride);
  d.sv_min = ceil_div(v_min, stride);
  d.sv_max = floor_div(v_max, stride);
  if (d.su_min > d.su_max || d.sv_min > d.sv_max) {
    throw std::runtime_error("empty translation domain");
  }
  return d;
}

TranslationDomain full_translation_domain(int test_cols, int test_rows, int ex_cols, int ex_rows,
                                          int stride) {
  if (test_cols < 1 || test_rows < 1 || ex_cols < 1 || ex_rows < 1) {
    throw std::runtime_error("empty patch grid");
  }
  return make_domain(-(test_cols - 1), ex_cols - 1, -(test_rows - 1), ex_rows - 1, stride);
}

double estimate_lambda(const PatchFeatureMap& test, const PatchFeatureMap& exemplar, int sample,
                       std::uint64_t seed) {
  if (test.dim != exemplar.dim) throw std::runtime_error("lambda: feature dimension mismatch");
  return estimate_lambda_raw(test.data.data(), test.cols * test.rows, exemplar.data.data(),
                             exemplar.cols * exemplar.rows, test.dim, sample, seed);
}

double estimate_lambda(const PixelFeatureMap& test, const PixelFeatureMap& exemplar, int sample,
                       std::uint64_t seed) {
  if (test.dim != exemplar.dim) throw std::runtime_error("lambda: feature dimension mismatch");
  return estimate_lambda_raw(test.data.data(), test.width * test.height, exemplar.data.data(),
                             exemplar.width * exemplar.height, test.dim, sample, seed);
}

double cell_data_term(const GridCell& cell, int u, int v, const PatchFeatureMap& test,
                      const PatchFeatureMap& exemplar, double lambda) {
  if (test.dim != exemplar.dim) throw std::runtime_error("feature dimension mismatch");
  const int z = cell.patch_count();
  if (z == 0) return lambda;
  double sum = 0.0;
  for (const int p : cell.patches) {
    const int c = p % test.cols;
    const int r = p / test.cols;
    const int tc = c + u;
    const int tr = r + v;
    if (tc >= 0 && tc < exemplar.cols && tr >= 0 && tr < exemplar.rows) {
      sum += simd::l1_dist(test.feature(c, r), exemplar.feature(tc, tr), test.dim);
    } else {
      sum += lambda;
    }
  }
  return std::min(sum / z, lambda);
}

double smoothness_term(int ui, int vi, int uj, int vj, double gamma) {
  const double d = std::abs(ui - uj) + std::abs(vi - vj);
  return std::min(d, gamma);
}

PatchCostTable build_patch_cost_table(const PatchFeatureMap& test, const PatchFeatureMap& exemplar,
                                      const TranslationDomain& domain, double lambda) {
  if (test.dim != exemplar.dim) throw std::runtime_error("feature dimension mismatch");
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw std::runtime_error("lambda must be positive and finite");
  }
  PatchCostTable table;
  table.patch_count = test.cols * test.rows;
  table.t_count = domain.size();
  table.cost.resize(static_cast<std::size_t>(table.patch_count) * table.t_count);

  const int u_count = domain.u_count();
  const int v_count = domain.v_count();
  parallel_for(static_cast<std::size_t>(table.patch_count), [&](std::size_t lo, std::size_t hi) {
    for (std::size_t p = lo; p < hi; ++p) {
      const int c = static_cast<int>(p) % test.cols;
      const int r = static_cast<int>(p) / test.cols;
      const double* f = test.feature(c, r);
      double* row = table.cost.data() + p * table.t_count;
      for (int iv = 0; iv < v_count; ++iv) {
        const int tr = r + domain.v_at(iv);
        const bool row_ok = tr >= 0 && tr < exemplar.rows;
        for (int iu = 0; iu < u_count; ++iu) {
          const int tc = c + domain.u_at(iu);
          row[static_cast<std::size_t>(iv) * u_count + iu] =
              (row_ok && tc >= 0 && tc < exemplar.cols)
                  ? simd::l1_dist(f, exemplar.feature(tc, tr), test.dim)
                  : lambda;
        }
      }
    }
  });
  return table;
}

GridLayerResult solve_grid_layer(const GridCellPyramid& pyr, const PatchFeatureMap& test,
                                 const PatchFeatureMap& exemplar, const TranslationDomain& domain,
                                 const MatchParams& params, const PatchCostTable* table) {
  check_params(params);
  if (!(params.lambda > 0.0)) throw std::runtime_error("lambda must be set before solving");
  if (pyr.patch_cols != test.cols || pyr.patch_rows != test.rows) {
    throw std::runtime_error("pyramid does not match the test feature map");
  }

  PatchCostTable local;
  if (table == nullptr) {
    local = build_patch_cost_table(test, exemplar, domain, params.lambda);
    table = &local;
  }

  const int labels = domain.size();
  MrfProblem problem;
  problem.domain = domain;
  problem.edges = pyr.edges;
  problem.data.resize(pyr.cells.size());
  parallel_for(pyr.cells.size(), [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      const GridCell& cell = pyr.cells[i];
      std::vector<double>& d = problem.data[i];
      d.assign(labels, 0.0);
      for (const int p : cell.patches) {
        const double* row = table->cost.data() + static_cast<std::size_t>(p) * labels;
        for (int l = 0; l < labels; ++l) d[l] += row[l];
      }
      const double z = cell.patch_count();
      for (int l = 0; l < labels; ++l) d[l] = std::min(d[l] / z, params.lambda);
    }
  });

  const MrfSolution sol = solve_mrf_bp(problem, params.alpha, params.gamma, params.bp_iters);

  GridLayerResult res;
  res.energy = sol.energy;
  res.energy_zero = sol.energy_zero;
  res.energy_argmin = sol.energy_argmin;
  res.flow.granularity = FlowGranularity::cell;
  res.flow.width = static_cast<int>(pyr.cells.size());
  res.flow.height = 1;
  res.flow.u.resize(pyr.cells.size());
  res.flow.v.resize(pyr.cells.size());
  res.flow.data_cost.resize(pyr.cells.size());
  for (std::size_t i = 0; i < pyr.cells.size(); ++i) {
    res.flow.u[i] = domain.u_of_label(sol.labels[i]);
    res.flow.v[i] = domain.v_of_label(sol.labels[i]);
    res.flow.data_cost[i] = problem.data[i][sol.labels[i]];
  }
  return res;
}

FlowField solve_patch_layer(const GridCellPyramid& pyr, const FlowField& cell_flow,
                            const PatchFeatureMap& test, const PatchFeatureMap& exemplar,
                            const TranslationDomain& domain, const MatchParams& params,
                            const PatchCostTable* table) {
  check_params(params);
  if (!(params.lambda > 0.0)) throw std::runtime_error("lambda must be set before solving");
  if (cell_flow.granularity != FlowGranularity::cell ||
      cell_flow.size() != pyr.cells.size()) {
    throw std::runtime_error("cell flow does not match the pyramid");
  }

  PatchCostTable local;
  if (table == nullptr) {
    local = build_patch_cost_table(test, exemplar, domain, params.lambda);
    table = &local;
  }

  const int patch_count = test.cols * test.rows;
  std::vector<int> parent(patch_count, -1);
  const int finest = pyr.levels - 1;
  for (int i = pyr.level_offset[finest]; i < pyr.level_offset[finest + 1]; ++i) {
    for (const int p : pyr.cells[i].patches) parent[p] = i;
  }
  for (const int c : parent) {
    if (c < 0) throw std::runtime_error("patch without a parent cell");
  }

  FlowField out;
  out.granularity = FlowGranularity::patch;
  out.width = test.cols;
  out.height = test.rows;
  out.u.resize(patch_count);
  out.v.resize(patch_count);
  out.data_cost.resize(patch_count);

  const int u_count = domain.u_count();
  const int v_count = domain.v_count();
  parallel_for(static_cast<std::size_t>(patch_count), [&](std::size_t lo, std::size_t hi) {
    for (std::size_t p = lo; p < hi; ++p) {
      const int pu = cell_flow.u[parent[p]];
      const int pv = cell_flow.v[parent[p]];
      const int p_su = pu / domain.stride - domain.su_min;
      const int p_sv = pv / domain.stride - domain.sv_min;
      const double* row = table->cost.data() + p * table->t_count;
      Candidate best;
      for (int iv = 0; iv < v_count; ++iv) {
        for (int iu = 0; iu < u_count; ++iu) {
          const double data = std::min(row[static_cast<std::size_t>(iv) * u_count + iu],
                                       params.lambda);
          const double step = std::abs(iu - p_su) + std::abs(iv - p_sv);
          const double cost = data + params.alpha * std::min(step, params.gamma);
          best.offer(cost, data, domain.u_at(iu), domain.v_at(iv));
        }
      }
      out.u[p] = best.u;
      out.v[p] = best.v;
      out.data_cost[p] = best.data;
    }
  });
  return out;
}

FlowField solve_pixel_layer(const FlowField& patch_flow, const PixelFeatureMap& test,
                            const PixelFeatureMap& exemplar, const MatchParams& params, int radius,
                            int pool_width) {
  check_params(params);
  if (patch_flow.granularity != FlowGranularity::patch) {
    throw std::runtime_error("pixel layer needs a patch-granularity flow");
  }
  if (radius < 0) throw std::runtime_error("pixel search radius must be non-negative");
  if (pool_width < 1) throw std::runtime_error("pool width must be positive");
  if (test.dim != exemplar.dim) throw std::runtime_error("feature dimension mismatch");

  const double lambda_pix =
      params.lambda > 0.0
          ? params.lambda
          : lambda_floor(estimate_lambda(test, exemplar, params.lambda_sample, params.seed));
  const double gamma_pix = params.gamma * pool_width;

  FlowField out;
  out.granularity = FlowGranularity::pixel;
  out.width = test.width;
  out.height = test.height;
  out.u.resize(static_cast<std::size_t>(test.width) * test.height);
  out.v.resize(out.u.size());
  out.data_cost.resize(out.u.size());

  parallel_for(static_cast<std::size_t>(test.height), [&](std::size_t lo, std::size_t hi) {
    for (std::size_t y = lo; y < hi; ++y) {
      for (int x = 0; x < test.width; ++x) {
        const int pc = std::min(x / pool_width, patch_flow.width - 1);
        const int pr = std::min(static_cast<int>(y) / pool_width, patch_flow.height - 1);
        const std::size_t pidx = static_cast<std::size_t>(pr) * patch_flow.width + pc;
        const int tu = patch_flow.u[pidx] * pool_width;
        const int tv = patch_flow.v[pidx] * pool_width;

        Candidate best;
        for (int dy = -radius; dy <= radius; ++dy) {
          const int ty = static_cast<int>(y) + tv + dy;
          const bool row_ok = ty >= 0 && ty < exemplar.height;
          for (int dx = -radius; dx <= radius; ++dx) {
            const int tx = x + tu + dx;
            double data = lambda_pix;
            if (row_ok && tx >= 0 && tx < exemplar.width) {
              data = std::min(simd::l1_dist(test.feature(x, static_cast<int>(y)),
                                            exemplar.feature(tx, ty), test.dim),
                              lambda_pix);
            }
            const double step = std::abs(dx) + std::abs(dy);
            const double cost = data + params.alpha * std::min(step, gamma_pix);
            best.offer(cost, data, tu + dx, tv + dy);
          }
        }
        const std::size_t i = y * test.width + x;
        out.u[i] = best.u;
        out.v[i] = best.v;
        out.data_cost[i] = best.data;
      }
    }
  });
  return out;
}

MatchResult match(const Image& test, const Image& exemplar, const Dictionary& dict,
                  const EncoderConfig& cfg, const MatchParams& params) {
  check_params(params);
  MatchResult res;

  double t0 = now_ms();
  PixelFeatureMap pix_test = encode_image(dict, test, cfg);
  PixelFeatureMap pix_ex = encode_image(dict, exemplar, cfg);
  res.times.encode_ms = now_ms() - t0;

  t0 = now_ms();
  const PatchFeatureMap pf_test = max_pool(pix_test, cfg.pool_width);
  const PatchFeatureMap pf_ex = max_pool(pix_ex, cfg.pool_width);
  res.times.pool_ms = now_ms() - t0;
  if (!params.pixel_layer) {
    pix_test = PixelFeatureMap{};
    pix_ex = PixelFeatureMap{};
  }

  MatchParams run = params;
  run.lambda = params.lambda > 0.0
                   ? params.lambda
                   : lambda_floor(estimate_lambda(pf_test, pf_ex, params.lambda_sample,
                                                  params.seed));
  res.lambda_patch = run.lambda;

  const TranslationDomain domain = full_translation_domain(
      pf_test.cols, pf_test.rows, pf_ex.cols, pf_ex.rows, params.candidate_stride);
  const GridCellPyramid pyr = build_grid_pyramid(pf_test, params.levels);
  const PatchCostTable table = build_patch_cost_table(pf_test, pf_ex, domain, run.lambda);

  t0 = now_ms();
  const GridLayerResult grid = solve_grid_layer(pyr, pf_test, pf_ex, domain, run, &table);
  res.grid_energy = grid.energy;
  res.grid_energy_zero = grid.energy_zero;
  res.grid_energy_argmin = grid.energy_argmin;
  res.times.grid_ms = now_ms() - t0;

  t0 = now_ms();
  res.patch_flow = solve_patch_layer(pyr, grid.flow, pf_test, pf_ex, domain, run, &table);
  res.times.patch_ms = now_ms() - t0;

  if (params.pixel_layer) {
    t0 = now_ms();
    MatchParams pix_run = params;
    pix_run.lambda = params.lambda > 0.0
                         ? params.lambda
                         : lambda_floor(estimate_lambda(pix_test, pix_ex, params.lambda_sample,
                                                        params.seed));
    res.lambda_pixel = pix_run.lambda;
    const int radius = params.pixel_radius < 0 ? cfg.pool_width : params.pixel_radius;
    res.pixel_flow =
        solve_pixel_layer(res.patch_flow, pix_test, pix_ex, pix_run, radius, cfg.pool_width);
    res.times.pixel_ms = now_ms() - t0;
  }
  return res;
}

}  // namespace ufl
