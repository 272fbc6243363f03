#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "irp/dataset.hpp"
#include "irp/error.hpp"
#include "irp/max_flow.hpp"

namespace irp {

// Feasible two-way partition of a group: no point of `upper` lies below a
// point of `lower`.
struct Cut {
  std::vector<std::size_t> lower;  // A
  std::vector<std::size_t> upper;  // B
  // sum_{B} w_i (y_i - ybar) - sum_{A} w_i (y_i - ybar), ybar the weighted
  // group mean. Equals 2 * sum_{B} w_i (y_i - ybar).
  double value = 0.0;
  // Set when the optimum is zero within tolerance: the group is a block.
  bool trivial = true;
};

// Residual capacities below this fraction of the total |c| mass count as
// saturated inside the flow solver.
inline constexpr double kFlowEpsilon = 1e-13;

// Builds closure networks and solves optimal cuts on order-convex groups of
// a fixed DAG. Keeps an n-sized index map between calls, so reuse one
// solver for many groups.
class CutSolver {
 public:
  explicit CutSolver(const DominanceDag& dag, double tol = 1e-9)
      : dag_(&dag), tol_(tol), local_(dag.node_count(), kAbsent) {}

  // Picard closure network. Member k of `group` becomes node k; the source
  // is node |group| and the sink |group| + 1. Node k gets an arc from the
  // source with capacity c[k] when c[k] > 0, or to the sink with capacity
  // -c[k] when c[k] < 0. Every DAG edge inside the group becomes an arc of
  // capacity sum|c| + 1.
  FlowNetwork network(std::span<const std::size_t> group, std::span<const double> c) {
    if (c.size() != group.size()) throw ValidationError("need one weight per group member");
    bind(group);
    const std::size_t g = group.size();
    FlowNetwork net(g + 2, g, g + 1);
    double total = 0.0;
    for (std::size_t k = 0; k < g; ++k) {
      if (!std::isfinite(c[k])) {
        release(group);
        throw ValidationError("closure weights must be finite");
      }
      total += std::abs(c[k]);
    }
    for (std::size_t k = 0; k < g; ++k) {
      if (c[k] > 0.0) net.add_arc(g, k, c[k]);
      else if (c[k] < 0.0) net.add_arc(k, g + 1, -c[k]);
    }
    const double infinite = total + 1.0;
    for (std::size_t k = 0; k < g; ++k) {
      for (const auto& e : dag_->out_edges(group[k])) {
        const std::size_t head = local_[e.to];
        if (head != kAbsent) net.add_arc(k, head, infinite);
      }
    }
    release(group);
    return net;
  }

  // Optimal cut of `group` for global response and weight arrays.
  Cut solve(std::span<const std::size_t> group, std::span<const double> y,
            std::span<const double> w) {
    if (group.empty()) throw ValidationError("optimal cut of an empty group");
    Cut cut;
    cut.lower.assign(group.begin(), group.end());
    if (group.size() == 1) return cut;

    double wsum = 0.0;
    double wysum = 0.0;
    for (std::size_t i : group) {
      if (i >= y.size() || i >= w.size()) throw ValidationError("group index out of range");
      wsum += w[i];
      wysum += w[i] * y[i];
    }
    const double mean = wysum / wsum;
    std::vector<double> c(group.size());
    double scale = 0.0;
    for (std::size_t k = 0; k < group.size(); ++k) {
      c[k] = w[group[k]] * (y[group[k]] - mean);
      scale += std::abs(c[k]);
    }
    if (scale == 0.0) return cut;

    std::vector<double> normalized(c.size());
    for (std::size_t k = 0; k < c.size(); ++k) normalized[k] = c[k] / scale;
    const FlowNetwork net = network(group, normalized);
    const MaxFlowResult flow = max_flow(net, kFlowEpsilon);

    std::vector<char> in_upper(group.size(), 0);
    double upper_mass = 0.0;
    for (std::size_t v : flow.source_side) {
      if (v < group.size()) {
        in_upper[v] = 1;
        upper_mass += c[v];
      }
    }
    const double value = 2.0 * upper_mass;
    if (value <= tol_ * scale) return cut;

    cut.lower.clear();
    for (std::size_t k = 0; k < group.size(); ++k) {
      (in_upper[k] ? cut.upper : cut.lower).push_back(group[k]);
    }
    std::sort(cut.lower.begin(), cut.lower.end());
    std::sort(cut.upper.begin(), cut.upper.end());
    cut.value = value;
    cut.trivial = false;
    return cut;
  }

  [[nodiscard]] double tolerance() const noexcept { return tol_; }

 private:
  static constexpr std::size_t kAbsent = std::numeric_limits<std::size_t>::max();

  void bind(std::span<const std::size_t> group) {
    for (std::size_t k = 0; k < group.size(); ++k) {
      const std::size_t i = group[k];
      if (i >= local_.size() || local_[i] != kAbsent) {
        for (std::size_t j = 0; j < k; ++j) local_[group[j]] = kAbsent;
        throw ValidationError(i >= local_.size() ? "group index out of range"
                                                 : "group lists an index twice");
      }
      local_[i] = k;
    }
  }
  void release(std::span<const std::size_t> group) {
    for (std::size_t i : group) local_[i] = kAbsent;
  }

  const DominanceDag* dag_;
  double tol_;
  std::vector<std::size_t> local_;
};

inline FlowNetwork build_closure_network(std::span<const std::size_t> group, const DominanceDag& dag,
                                         std::span<const double> c) {
  return CutSolver(dag).network(group, c);
}

inline Cut optimal_cut(std::span<const std::size_t> group, const DominanceDag& dag,
                       std::span<const double> y, std::span<const double> w, double tol = 1e-9) {
  return CutSolver(dag, tol).solve(group, y, w);
}

}  // namespace irp
