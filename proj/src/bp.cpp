#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "ufl/matching.hpp"
#include "ufl/util.hpp"

namespace ufl {

namespace {

// Step-L1 distance between two label indices on the u_count-wide label grid.
int label_step_l1(int a, int b, int u_count) {
  const int au = a % u_count, av = a / u_count;
  const int bu = b % u_count, bv = b / u_count;
  return std::abs(au - bu) + std::abs(av - bv);
}

struct LabelPick {
  int label = -1;
  double cost = std::numeric_limits<double>::infinity();
  int t_l1 = 0;
};

// Argmin with the solver-wide tie-breaking: lowest cost, then smallest
// ||t||_1, then first in row-major scan order.
int argmin_label(const std::vector<double>& costs, const TranslationDomain& dom) {
  LabelPick best;
  for (int l = 0; l < static_cast<int>(costs.size()); ++l) {
    const int t_l1 = std::abs(dom.u_of_label(l)) + std::abs(dom.v_of_label(l));
    if (costs[l] < best.cost || (costs[l] == best.cost && t_l1 < best.t_l1)) {
      best.label = l;
      best.cost = costs[l];
      best.t_l1 = t_l1;
    }
  }
  return best.label;
}

}  // namespace

std::vector<double> dt_message(const std::vector<double>& h, int u_count, int v_count,
                               double alpha, double gamma) {
  if (u_count < 1 || v_count < 1 || h.size() != static_cast<std::size_t>(u_count) * v_count) {
    throw std::runtime_error("distance transform: empty or mismatched domain");
  }
  if (alpha < 0.0) throw std::runtime_error("distance transform: negative smoothness weight");

  double min_h = h[0];
  for (const double v : h) {
    if (!std::isfinite(v)) throw std::runtime_error("distance transform: non-finite cost");
    min_h = std::min(min_h, v);
  }
  if (alpha == 0.0) return std::vector<double>(h.size(), min_h);

  std::vector<double> d = h;
  for (int iv = 0; iv < v_count; ++iv) {
    double* row = d.data() + static_cast<std::size_t>(iv) * u_count;
    for (int iu = 1; iu < u_count; ++iu) row[iu] = std::min(row[iu], row[iu - 1] + alpha);
    for (int iu = u_count - 2; iu >= 0; --iu) row[iu] = std::min(row[iu], row[iu + 1] + alpha);
  }
  for (int iu = 0; iu < u_count; ++iu) {
    double* col = d.data() + iu;
    for (int iv = 1; iv < v_count; ++iv) {
      col[static_cast<std::size_t>(iv) * u_count] =
          std::min(col[static_cast<std::size_t>(iv) * u_count],
                   col[static_cast<std::size_t>(iv - 1) * u_count] + alpha);
    }
    for (int iv = v_count - 2; iv >= 0; --iv) {
      col[static_cast<std::size_t>(iv) * u_count] =
          std::min(col[static_cast<std::size_t>(iv) * u_count],
                   col[static_cast<std::size_t>(iv + 1) * u_count] + alpha);
    }
  }
  if (std::isfinite(gamma)) {
    const double cap = min_h + alpha * gamma;
    for (double& v : d) v = std::min(v, cap);
  }
  return d;
}

double labeling_energy(const MrfProblem& problem, const std::vector<int>& labels, double alpha,
                       double gamma) {
  if (labels.size() != problem.data.size()) {
    throw std::runtime_error("labeling size does not match node count");
  }
  const int u_count = problem.domain.u_count();
  double energy = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) energy += problem.data[i][labels[i]];
  for (const auto& [a, b] : problem.edges) {
    const double d = label_step_l1(labels[a], labels[b], u_count);
    energy += alpha * std::min(d, gamma);
  }
  return energy;
}

MrfSolution solve_mrf_bp(const MrfProblem& problem, double alpha, double gamma, int bp_iters) {
  const int n = static_cast<int>(problem.data.size());
  const int labels = problem.domain.size();
  if (n < 1) throw std::runtime_error("BP: empty problem");
  if (bp_iters < 1) throw std::runtime_error("BP: iteration count must be at least 1");
  if (alpha < 0.0 || gamma <= 0.0) throw std::runtime_error("BP: invalid smoothness parameters");
  for (const auto& d : problem.data) {
    if (static_cast<int>(d.size()) != labels) {
      throw std::runtime_error("BP: data cost size does not match the domain");
    }
    for (const double v : d) {
      if (!std::isfinite(v)) throw std::runtime_error("BP: non-finite data term");
    }
  }
  for (const auto& [a, b] : problem.edges) {
    if (a < 0 || a >= n || b < 0 || b >= n || a == b) {
      throw std::runtime_error("BP: invalid edge");
    }
  }

  // Directed slot 2e is a->b, slot 2e+1 is b->a for undirected edge e.
  const int e_count = static_cast<int>(problem.edges.size());
  struct Incoming {
    int from;
    int slot;
  };
  std::vector<std::vector<Incoming>> adj(n);
  for (int e = 0; e < e_count; ++e) {
    const auto& [a, b] = problem.edges[e];
    adj[b].push_back({a, 2 * e});
    adj[a].push_back({b, 2 * e + 1});
  }

  const int u_count = problem.domain.u_count();
  const int v_count = problem.domain.v_count();
  std::vector<std::vector<double>> msg(static_cast<std::size_t>(2) * e_count,
                                       std::vector<double>(labels, 0.0));
  auto msg_next = msg;

  for (int it = 0; it < bp_iters; ++it) {
    parallel_for(static_cast<std::size_t>(2) * e_count, [&](std::size_t lo, std::size_t hi) {
      std::vector<double> h(labels);
      for (std::size_t s = lo; s < hi; ++s) {
        const int e = static_cast<int>(s / 2);
        // Slot 2e carries a->b, so its source is a; slot 2e+1's source is b.
        const int src = (s % 2 == 0) ? problem.edges[e].first : problem.edges[e].second;
        const int dst = (s % 2 == 0) ? problem.edges[e].second : problem.edges[e].first;
        const std::vector<double>& data = problem.data[src];
        std::copy(data.begin(), data.end(), h.begin());
        for (const Incoming& in : adj[src]) {
          if (in.from == dst) continue;
          const std::vector<double>& m = msg[in.slot];
          for (int l = 0; l < labels; ++l) h[l] += m[l];
        }
        std::vector<double> out = dt_message(h, u_count, v_count, alpha, gamma);
        const double lo_val = *std::min_element(out.begin(), out.end());
        for (double& v : out) v -= lo_val;
        msg_next[s] = std::move(out);
      }
    });
    msg.swap(msg_next);
  }

  std::vector<int> bp_labels(n), argmin_labels(n);
  std::vector<double> belief(labels);
  for (int i = 0; i < n; ++i) {
    std::copy(problem.data[i].begin(), problem.data[i].end(), belief.begin());
    for (const Incoming& in : adj[i]) {
      const std::vector<double>& m = msg[in.slot];
      for (int l = 0; l < labels; ++l) belief[l] += m[l];
    }
    bp_labels[i] = argmin_label(belief, problem.domain);
    argmin_labels[i] = argmin_label(problem.data[i], problem.domain);
  }

  MrfSolution sol;
  const double e_bp = labeling_energy(problem, bp_labels, alpha, gamma);
  sol.energy_argmin = labeling_energy(problem, argmin_labels, alpha, gamma);
  const int zero_label = problem.domain.label_of(0, 0);
  sol.energy_zero = std::numeric_limits<double>::infinity();
  std::vector<int> zero_labels;
  if (zero_label >= 0) {
    zero_labels.assign(n, zero_label);
    sol.energy_zero = labeling_energy(problem, zero_labels, alpha, gamma);
  }

  // BP output unless a baseline labeling strictly beats it.
  if (e_bp <= sol.energy_zero && e_bp <= sol.energy_argmin) {
    sol.labels = std::move(bp_labels);
    sol.energy = e_bp;
  } else if (sol.energy_zero <= sol.energy_argmin) {
    sol.labels = std::move(zero_labels);
    sol.energy = sol.energy_zero;
  } else {
    sol.labels = std::move(argmin_labels);
    sol.energy = sol.energy_argmin;
  }
  return sol;
}

}  // namespace ufl
