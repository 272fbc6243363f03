#pragma once

#include <algorithm>
#include <cstddef>
#include <limits>
#include <ostream>
#include <vector>

#include "irp/error.hpp"

namespace irp {

struct Arc {
  std::size_t from;
  std::size_t to;
  double capacity;
};

// Capacitated digraph with a designated source and sink.
class FlowNetwork {
 public:
  FlowNetwork() = default;
  FlowNetwork(std::size_t node_count, std::size_t source, std::size_t sink)
      : node_count_(node_count), source_(source), sink_(sink) {
    if (source >= node_count || sink >= node_count || source == sink) {
      throw ValidationError("flow network needs distinct in-range source and sink");
    }
  }

  std::size_t add_arc(std::size_t from, std::size_t to, double capacity) {
    if (from >= node_count_ || to >= node_count_) throw ValidationError("arc endpoint out of range");
    if (!(capacity >= 0.0)) throw ValidationError("arc capacity must be nonnegative");
    arcs_.push_back({from, to, capacity});
    return arcs_.size() - 1;
  }

  [[nodiscard]] std::size_t node_count() const noexcept { return node_count_; }
  [[nodiscard]] std::size_t source() const noexcept { return source_; }
  [[nodiscard]] std::size_t sink() const noexcept { return sink_; }
  [[nodiscard]] const std::vector<Arc>& arcs() const noexcept { return arcs_; }

 private:
  std::size_t node_count_ = 2;
  std::size_t source_ = 0;
  std::size_t sink_ = 1;
  std::vector<Arc> arcs_;
};

struct MaxFlowResult {
  double value = 0.0;
  // Nodes reachable from the source in the final residual graph, ascending.
  // This is the source side of the minimum cut closest to the source.
  std::vector<std::size_t> source_side;
};

namespace detail {

// Dinic's algorithm on a residual graph stored as paired arcs (2k, 2k+1).
// Residual capacities at or below `eps` count as saturated.
class Dinic {
 public:
  Dinic(const FlowNetwork& net, double eps)
      : n_(net.node_count()), eps_(eps), head_(n_, kNone) {
    const auto& arcs = net.arcs();
    to_.reserve(2 * arcs.size());
    residual_.reserve(2 * arcs.size());
    next_.reserve(2 * arcs.size());
    for (const auto& a : arcs) {
      push(a.from, a.to, a.capacity);
      push(a.to, a.from, 0.0);
    }
  }

  double run(std::size_t s, std::size_t t) {
    double total = 0.0;
    level_.assign(n_, -1);
    while (bfs(s, t)) {
      current_ = head_;
      total += blocking_flow(s, t);
    }
    return total;
  }

  std::vector<std::size_t> reachable(std::size_t s) const {
    std::vector<char> seen(n_, 0);
    std::vector<std::size_t> stack{s};
    seen[s] = 1;
    while (!stack.empty()) {
      const std::size_t u = stack.back();
      stack.pop_back();
      for (std::size_t e = head_[u]; e != kNone; e = next_[e]) {
        if (residual_[e] > eps_ && !seen[to_[e]]) {
          seen[to_[e]] = 1;
          stack.push_back(to_[e]);
        }
      }
    }
    std::vector<std::size_t> out;
    for (std::size_t v = 0; v < n_; ++v) {
      if (seen[v]) out.push_back(v);
    }
    return out;
  }

 private:
  static constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

  void push(std::size_t from, std::size_t to, double cap) {
    to_.push_back(to);
    residual_.push_back(cap);
    next_.push_back(head_[from]);
    head_[from] = to_.size() - 1;
  }

  bool bfs(std::size_t s, std::size_t t) {
    std::fill(level_.begin(), level_.end(), -1);
    queue_.clear();
    queue_.push_back(s);
    level_[s] = 0;
    for (std::size_t q = 0; q < queue_.size(); ++q) {
      const std::size_t u = queue_[q];
      for (std::size_t e = head_[u]; e != kNone; e = next_[e]) {
        if (residual_[e] > eps_ && level_[to_[e]] < 0) {
          level_[to_[e]] = level_[u] + 1;
          queue_.push_back(to_[e]);
        }
      }
    }
    return level_[t] >= 0;
  }

  // Iterative DFS over the level graph; `path_` holds the arcs from s to u.
  double blocking_flow(std::size_t s, std::size_t t) {
    double pushed = 0.0;
    path_.clear();
    std::size_t u = s;
    while (true) {
      if (u == t) {
        double bottleneck = std::numeric_limits<double>::infinity();
        for (std::size_t e : path_) bottleneck = std::min(bottleneck, residual_[e]);
        std::size_t first_saturated = path_.size();
        for (std::size_t k = 0; k < path_.size(); ++k) {
          const std::size_t e = path_[k];
          residual_[e] -= bottleneck;
          residual_[e ^ 1] += bottleneck;
          if (residual_[e] <= eps_ && first_saturated == path_.size()) first_saturated = k;
        }
        pushed += bottleneck;
        path_.resize(first_saturated);
        u = path_.empty() ? s : to_[path_.back()];
        continue;
      }
      std::size_t& e = current_[u];
      while (e != kNone && !(residual_[e] > eps_ && level_[to_[e]] == level_[u] + 1)) e = next_[e];
      if (e != kNone) {
        path_.push_back(e);
        u = to_[e];
        continue;
      }
      // dead end: retire u from this phase
      level_[u] = -1;
      if (path_.empty()) break;
      const std::size_t back = path_.back();
      path_.pop_back();
      u = to_[back ^ 1];
      current_[u] = next_[current_[u]];
    }
    return pushed;
  }

  std::size_t n_;
  double eps_;
  std::vector<std::size_t> head_;
  std::vector<std::size_t> to_;
  std::vector<std::size_t> next_;
  std::vector<double> residual_;
  std::vector<int> level_;
  std::vector<std::size_t> current_;
  std::vector<std::size_t> queue_;
  std::vector<std::size_t> path_;
};

}  // namespace detail

// Maximum s-t flow. Residual capacities at or below `eps` are treated as
// zero; eps = 0 gives plain floating-point Dinic.
inline MaxFlowResult max_flow(const FlowNetwork& net, double eps = 0.0) {
  detail::Dinic solver(net, eps);
  MaxFlowResult result;
  result.value = solver.run(net.source(), net.sink());
  result.source_side = solver.reachable(net.source());
  return result;
}

// DIMACS max-flow text: "p max", source/sink descriptors, one arc per line
// (1-based node ids).
inline void write_dimacs(std::ostream& os, const FlowNetwork& net) {
  os << "p max " << net.node_count() << ' ' << net.arcs().size() << '\n';
  os << "n " << net.source() + 1 << " s\n";
  os << "n " << net.sink() + 1 << " t\n";
  const auto old = os.precision(17);
  for (const auto& a : net.arcs()) os << "a " << a.from + 1 << ' ' << a.to + 1 << ' ' << a.capacity << '\n';
  os.precision(old);
}

}  // namespace irp
