#pragma once

// Random instance generators and structural checks shared by the unit
// suites and the acceptance runner.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include "irp.hpp"

namespace irp::check {

struct Instance {
  WeightedDataset data;
  DominanceDag dag;
};

struct InstanceSpec {
  std::size_t n = 50;
  std::size_t dim = 2;
  bool ternary = false;
  bool weighted = false;
  double noise = 1.0;
};

inline std::vector<Observation> random_rows(const InstanceSpec& spec, Rng& rng) {
  static constexpr double kTernary[] = {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
  std::vector<Observation> rows(spec.n);
  for (auto& row : rows) {
    row.covariates.resize(spec.dim);
    double trend = 0.0;
    for (auto& v : row.covariates) {
      v = spec.ternary ? static_cast<double>(rng.categorical(kTernary)) : rng.uniform();
      trend += v;
    }
    row.response = trend + spec.noise * rng.normal();
    row.weight = spec.weighted ? rng.uniform(0.2, 3.0) : 1.0;
  }
  return rows;
}

inline Instance random_instance(const InstanceSpec& spec, Rng& rng) {
  Instance inst;
  inst.data = merge_duplicates(random_rows(spec, rng));
  inst.dag = build_order(inst.data);
  return inst;
}

// A chain 0 < 1 < ... < n-1 with a noisy increasing trend.
inline Instance random_chain(std::size_t n, Rng& rng, bool weighted = false) {
  std::vector<Observation> rows(n);
  for (std::size_t i = 0; i < n; ++i) {
    rows[i].covariates = {static_cast<double>(i)};
    rows[i].response = 3.0 * static_cast<double>(i) / static_cast<double>(n) + rng.normal();
    rows[i].weight = weighted ? rng.uniform(0.2, 3.0) : 1.0;
  }
  Instance inst;
  inst.data = merge_duplicates(rows);
  inst.dag = build_order(inst.data);
  return inst;
}

inline double response_scale(std::span<const double> y) {
  double s = 0.0;
  for (double v : y) s = std::max(s, std::abs(v));
  return s;
}

// Number of DAG edges (i, j) with fits[i] > fits[j] + slack.
inline std::size_t order_violations(std::span<const double> fits, const DominanceDag& dag, double slack) {
  std::size_t bad = 0;
  for (const auto& e : dag.edges()) {
    if (fits[e.from] > fits[e.to] + slack) ++bad;
  }
  return bad;
}

// Blocks of a fitted vector: components of the order graph joined through
// edges whose endpoint fits agree within `tie`.
inline std::vector<std::size_t> blocks_of(std::span<const double> fits, const DominanceDag& dag, double tie) {
  std::vector<std::size_t> parent(fits.size());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (const auto& e : dag.edges()) {
    if (std::abs(fits[e.from] - fits[e.to]) <= tie) parent[find(e.from)] = find(e.to);
  }
  std::vector<std::size_t> label(fits.size());
  for (std::size_t i = 0; i < fits.size(); ++i) label[i] = find(i);
  return label;
}

// Number of (k, block) pairs where a block is split across groups of M_k.
inline std::size_t blocks_cut(const IrpPath& path, std::span<const std::size_t> block_label) {
  std::size_t bad = 0;
  const std::size_t n = block_label.size();
  std::vector<std::size_t> seen(n);
  for (std::size_t k = 0; k <= path.iterations(); ++k) {
    const auto ids = path.group_ids_at(k);
    std::fill(seen.begin(), seen.end(), kNoGroup);
    std::vector<char> flagged(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
      auto& s = seen[block_label[i]];
      if (s == kNoGroup) {
        s = ids[i];
      } else if (s != ids[i] && !flagged[block_label[i]]) {
        flagged[block_label[i]] = 1;
        ++bad;
      }
    }
  }
  return bad;
}

}  // namespace irp::check
