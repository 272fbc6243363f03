#pragma once

// Reference solvers used to verify the partitioning engine. They share no
// code with the flow-based path beyond the DAG type.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "irp/dataset.hpp"
#include "irp/error.hpp"

namespace irp::oracle {

// Pool adjacent violators for a chain y_0 ⪯ y_1 ⪯ ... (weighted L2).
inline std::vector<double> pava(std::span<const double> y, std::span<const double> w) {
  if (y.size() != w.size()) throw ValidationError("pava: size mismatch");
  struct Pool {
    double mean;
    double weight;
    std::size_t count;
  };
  std::vector<Pool> stack;
  stack.reserve(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (!(w[i] > 0.0)) throw ValidationError("pava: weights must be positive");
    Pool cur{y[i], w[i], 1};
    while (!stack.empty() && stack.back().mean > cur.mean) {
      const Pool& top = stack.back();
      const double weight = top.weight + cur.weight;
      cur = {(top.mean * top.weight + cur.mean * cur.weight) / weight, weight, top.count + cur.count};
      stack.pop_back();
    }
    stack.push_back(cur);
  }
  std::vector<double> out;
  out.reserve(y.size());
  for (const auto& p : stack) out.insert(out.end(), p.count, p.mean);
  return out;
}

struct DykstraResult {
  std::vector<double> fits;
  std::size_t sweeps = 0;
  bool converged = false;
  double last_change = 0.0;
};

// Dykstra's alternating projections onto the half-spaces z_i <= z_j, one per
// DAG edge, in the w-weighted norm. Stops when a full sweep moves no fit by
// more than tol * max(1, max|y|).
inline DykstraResult dykstra_project(std::span<const double> y, std::span<const double> w, const DominanceDag& dag,
                                     double tol = 1e-10, std::size_t max_sweeps = 100000) {
  const std::size_t n = y.size();
  if (w.size() != n || dag.node_count() != n) throw ValidationError("dykstra: size mismatch");
  double scale = 1.0;
  for (double v : y) scale = std::max(scale, std::abs(v));
  const auto edges = dag.edges();
  std::vector<double> z(y.begin(), y.end());
  // per-edge increments on the tail and head coordinates
  std::vector<double> inc_tail(edges.size(), 0.0);
  std::vector<double> inc_head(edges.size(), 0.0);
  DykstraResult result;
  while (result.sweeps < max_sweeps) {
    ++result.sweeps;
    double change = 0.0;
    for (std::size_t e = 0; e < edges.size(); ++e) {
      const std::size_t i = edges[e].from;
      const std::size_t j = edges[e].to;
      const double ui = z[i] + inc_tail[e];
      const double uj = z[j] + inc_head[e];
      double vi = ui;
      double vj = uj;
      if (ui > uj) {
        vi = vj = (w[i] * ui + w[j] * uj) / (w[i] + w[j]);
      }
      inc_tail[e] = ui - vi;
      inc_head[e] = uj - vj;
      change = std::max({change, std::abs(vi - z[i]), std::abs(vj - z[j])});
      z[i] = vi;
      z[j] = vj;
    }
    result.last_change = change;
    if (change < tol * scale) {
      result.converged = true;
      break;
    }
  }
  result.fits = std::move(z);
  return result;
}

// reach[i][j] != 0 iff x_i ⪯ x_j (i == j included), by DFS over the DAG.
inline std::vector<std::vector<char>> transitive_closure(const DominanceDag& dag) {
  const std::size_t n = dag.node_count();
  std::vector<std::vector<char>> reach(n, std::vector<char>(n, 0));
  std::vector<std::size_t> stack;
  for (std::size_t s = 0; s < n; ++s) {
    auto& row = reach[s];
    row[s] = 1;
    stack.assign(1, s);
    while (!stack.empty()) {
      const std::size_t u = stack.back();
      stack.pop_back();
      for (const auto& e : dag.out_edges(u)) {
        if (!row[e.to]) {
          row[e.to] = 1;
          stack.push_back(e.to);
        }
      }
    }
  }
  return reach;
}

struct EnumeratedCut {
  std::vector<std::size_t> lower;
  std::vector<std::size_t> upper;
  double g_star = 0.0;   // sum_B c - sum_A c, c_i = w_i (y_i - ybar)
  double g_tilde = 0.0;  // W_A (ybar_A - ybar)^2 + W_B (ybar_B - ybar)^2
};

struct CutEnumeration {
  std::vector<EnumeratedCut> cuts;
  // Argmax over cuts with both sides nonempty; absent for singleton groups.
  std::optional<std::size_t> best_g_star;
  std::optional<std::size_t> best_g_tilde;
};

inline constexpr std::size_t kMaxEnumeratedGroup = 20;

// Every feasible (A, B) split of `group`: B closed upward within the group
// under the order reachable in `dag`.
inline CutEnumeration enumerate_cuts(std::span<const std::size_t> group, const DominanceDag& dag,
                                     std::span<const double> y, std::span<const double> w) {
  const std::size_t g = group.size();
  if (g > kMaxEnumeratedGroup) throw ValidationError("enumerate_cuts: group larger than 20");
  for (std::size_t i : group) {
    if (i >= dag.node_count() || i >= y.size() || i >= w.size()) throw ValidationError("group index out of range");
  }
  // up[k]: members reachable from member k
  std::vector<std::uint32_t> up(g, 0);
  std::vector<char> seen(dag.node_count());
  std::vector<std::size_t> stack;
  for (std::size_t k = 0; k < g; ++k) {
    std::fill(seen.begin(), seen.end(), 0);
    stack.assign(1, group[k]);
    seen[group[k]] = 1;
    while (!stack.empty()) {
      const std::size_t u = stack.back();
      stack.pop_back();
      for (const auto& e : dag.out_edges(u)) {
        if (!seen[e.to]) {
          seen[e.to] = 1;
          stack.push_back(e.to);
        }
      }
    }
    for (std::size_t j = 0; j < g; ++j) {
      if (j != k && seen[group[j]]) up[k] |= std::uint32_t{1} << j;
    }
  }
  double wsum = 0.0;
  double wysum = 0.0;
  for (std::size_t i : group) {
    wsum += w[i];
    wysum += w[i] * y[i];
  }
  const double mean = wysum / wsum;

  CutEnumeration out;
  const std::uint32_t full = g == 32 ? ~0u : ((std::uint32_t{1} << g) - 1);
  for (std::uint32_t b = 0; b <= full; ++b) {
    bool feasible = true;
    for (std::size_t k = 0; k < g && feasible; ++k) {
      if ((b >> k & 1u) && (up[k] & ~b)) feasible = false;
    }
    if (feasible) {
      EnumeratedCut cut;
      double wa = 0.0, wb = 0.0, sa = 0.0, sb = 0.0;
      for (std::size_t k = 0; k < g; ++k) {
        const std::size_t i = group[k];
        const double c = w[i] * (y[i] - mean);
        if (b >> k & 1u) {
          cut.upper.push_back(i);
          cut.g_star += c;
          wb += w[i];
          sb += w[i] * y[i];
        } else {
          cut.lower.push_back(i);
          cut.g_star -= c;
          wa += w[i];
          sa += w[i] * y[i];
        }
      }
      if (wa > 0.0) cut.g_tilde += wa * (sa / wa - mean) * (sa / wa - mean);
      if (wb > 0.0) cut.g_tilde += wb * (sb / wb - mean) * (sb / wb - mean);
      const std::size_t idx = out.cuts.size();
      if (!cut.lower.empty() && !cut.upper.empty()) {
        if (!out.best_g_star || cut.g_star > out.cuts[*out.best_g_star].g_star) out.best_g_star = idx;
        if (!out.best_g_tilde || cut.g_tilde > out.cuts[*out.best_g_tilde].g_tilde) out.best_g_tilde = idx;
      }
      out.cuts.push_back(std::move(cut));
    }
    if (b == full) break;
  }
  return out;
}

}  // namespace irp::oracle
