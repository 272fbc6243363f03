#pragma once

#include <algorithm>
#include <cstddef>
#include <limits>
#include <optional>
#include <queue>
#include <span>
#include <vector>

#include "irp/dataset.hpp"
#include "irp/error.hpp"
#include "irp/mincut.hpp"

namespace irp {

inline constexpr std::size_t kNoGroup = std::numeric_limits<std::size_t>::max();

struct IrpConfig {
  double tol = 1e-9;
  // Cap on executed cuts; unset means n (a path never needs more than n - 1).
  std::optional<std::size_t> max_iterations;
};

// One node of the partition tree. Ids are assigned in creation order, so a
// parent id is always smaller than its children's.
struct GroupRecord {
  std::size_t parent = kNoGroup;
  std::size_t created = 0;        // model index at which the group appears
  std::size_t split = kNoGroup;   // model index at which it was cut, if ever
  std::size_t size = 0;
  double weight = 0.0;
  double fit = 0.0;               // weighted mean response
  double sum_squares = 0.0;       // weighted within-group residual sum of squares
};

// Cut executed to go from M_{k-1} to M_k.
struct CutRecord {
  std::size_t k = 0;
  double value = 0.0;
  std::size_t parent = kNoGroup;
  std::size_t lower_group = kNoGroup;
  std::size_t upper_group = kNoGroup;
  std::size_t lower_size = 0;
  std::size_t upper_size = 0;
  double objective = 0.0;  // weighted RSS of M_k
};

struct IsotonicModel {
  std::size_t k = 0;
  std::vector<std::vector<std::size_t>> groups;
  std::vector<double> fits;             // per group
  std::vector<std::size_t> group_of;    // per observation
  double objective = 0.0;

  [[nodiscard]] double fitted(std::size_t i) const { return fits[group_of[i]]; }
  [[nodiscard]] std::vector<double> fitted_values() const {
    std::vector<double> out(group_of.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = fits[group_of[i]];
    return out;
  }
};

// The regularization path M_0 ... M_K. Partitions are kept as a tree of
// group records plus each observation's latest group; any M_k is rebuilt
// from those on demand.
class IrpPath {
 public:
  IrpPath() = default;

  // Assemble a path from stored records (deserialization).
  IrpPath(std::vector<double> y, std::vector<double> w, std::vector<GroupRecord> groups,
          std::vector<CutRecord> cuts, std::vector<std::size_t> leaf_of, bool truncated)
      : y_(std::move(y)), w_(std::move(w)), groups_(std::move(groups)), cuts_(std::move(cuts)),
        leaf_of_(std::move(leaf_of)), truncated_(truncated) {
    check();
  }

  [[nodiscard]] std::size_t observation_count() const noexcept { return leaf_of_.size(); }
  // K, the number of executed cuts; models are M_0 ... M_K.
  [[nodiscard]] std::size_t iterations() const noexcept { return cuts_.size(); }
  [[nodiscard]] bool truncated() const noexcept { return truncated_; }
  [[nodiscard]] std::span<const GroupRecord> groups() const noexcept { return groups_; }
  [[nodiscard]] std::span<const CutRecord> cuts() const noexcept { return cuts_; }
  [[nodiscard]] std::span<const std::size_t> leaf_of() const noexcept { return leaf_of_; }
  [[nodiscard]] std::span<const double> responses() const noexcept { return y_; }
  [[nodiscard]] std::span<const double> weights() const noexcept { return w_; }

  [[nodiscard]] double objective(std::size_t k) const {
    if (k > iterations()) throw ValidationError("model index out of range");
    return k == 0 ? groups_.front().sum_squares : cuts_[k - 1].objective;
  }

  // Group of every observation in M_k.
  [[nodiscard]] std::vector<std::size_t> group_ids_at(std::size_t k) const {
    if (k > iterations()) {
      throw ValidationError("model index " + std::to_string(k) + " out of range [0, " +
                            std::to_string(iterations()) + "]");
    }
    std::vector<std::size_t> rep(groups_.size());
    for (std::size_t g = 0; g < groups_.size(); ++g) {
      rep[g] = groups_[g].created > k ? rep[groups_[g].parent] : g;
    }
    std::vector<std::size_t> out(leaf_of_.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = rep[leaf_of_[i]];
    return out;
  }

  // Fitted value of every observation in M_k.
  [[nodiscard]] std::vector<double> fitted_at(std::size_t k) const {
    auto ids = group_ids_at(k);
    std::vector<double> out(ids.size());
    for (std::size_t i = 0; i < ids.size(); ++i) out[i] = groups_[ids[i]].fit;
    return out;
  }

  [[nodiscard]] double global_mean() const { return groups_.front().fit; }

 private:
  friend IrpPath fit_path(std::span<const double>, std::span<const double>, const DominanceDag&,
                          const IrpConfig&);

  void check() const {
    if (groups_.empty() || leaf_of_.size() != y_.size() || w_.size() != y_.size()) {
      throw ValidationError("inconsistent path records");
    }
    for (std::size_t g = 1; g < groups_.size(); ++g) {
      if (groups_[g].parent >= g) throw ValidationError("group tree out of order");
    }
    for (std::size_t leaf : leaf_of_) {
      if (leaf >= groups_.size()) throw ValidationError("observation assigned to unknown group");
    }
  }

  std::vector<double> y_;
  std::vector<double> w_;
  std::vector<GroupRecord> groups_;
  std::vector<CutRecord> cuts_;
  std::vector<std::size_t> leaf_of_;
  bool truncated_ = false;
};

namespace detail {

inline void summarize_group(std::span<const std::size_t> members, std::span<const double> y,
                            std::span<const double> w, GroupRecord& rec) {
  double wsum = 0.0;
  double wysum = 0.0;
  for (std::size_t i : members) {
    wsum += w[i];
    wysum += w[i] * y[i];
  }
  rec.size = members.size();
  rec.weight = wsum;
  rec.fit = wysum / wsum;
  double ss = 0.0;
  for (std::size_t i : members) ss += w[i] * (y[i] - rec.fit) * (y[i] - rec.fit);
  rec.sum_squares = ss;
}

}  // namespace detail

// Isotonic recursive partitioning. Starts from a single group; every step
// executes the pending cut with the largest value (earliest found first on
// ties), then solves the optimal cut of both children. Children whose cut is
// trivial are final blocks.
inline IrpPath fit_path(std::span<const double> y, std::span<const double> w, const DominanceDag& dag,
                        const IrpConfig& config = {}) {
  const std::size_t n = y.size();
  if (n == 0) throw ValidationError("cannot fit an empty dataset");
  if (w.size() != n || dag.node_count() != n) throw ValidationError("responses, weights and order disagree in size");
  if (!(config.tol > 0.0)) throw ValidationError("tolerance must be positive");
  const std::size_t max_iterations = config.max_iterations.value_or(n);

  IrpPath path;
  path.y_.assign(y.begin(), y.end());
  path.w_.assign(w.begin(), w.end());
  path.leaf_of_.assign(n, 0);

  struct Candidate {
    double value;
    std::size_t seq;
    std::size_t group;
    Cut cut;
  };
  struct Lower {
    bool operator()(const Candidate& a, const Candidate& b) const {
      return a.value != b.value ? a.value < b.value : a.seq > b.seq;
    }
  };
  std::priority_queue<Candidate, std::vector<Candidate>, Lower> pending;
  std::size_t seq = 0;
  CutSolver solver(dag, config.tol);

  auto consider = [&](std::size_t g, std::vector<std::size_t>& members) {
    if (members.size() < 2) return;
    Cut cut = solver.solve(members, y, w);
    std::vector<std::size_t>().swap(members);
    if (!cut.trivial) pending.push({cut.value, seq++, g, std::move(cut)});
  };

  std::vector<std::size_t> all(n);
  for (std::size_t i = 0; i < n; ++i) all[i] = i;
  path.groups_.emplace_back();
  detail::summarize_group(all, y, w, path.groups_.back());
  double objective = path.groups_.back().sum_squares;
  consider(0, all);

  while (!pending.empty()) {
    if (path.cuts_.size() >= max_iterations) {
      path.truncated_ = true;
      break;
    }
    Candidate top = pending.top();
    pending.pop();
    const std::size_t k = path.cuts_.size() + 1;
    const std::size_t lower_id = path.groups_.size();
    const std::size_t upper_id = lower_id + 1;
    path.groups_[top.group].split = k;
    for (auto [members, id] : {std::pair{&top.cut.lower, lower_id}, std::pair{&top.cut.upper, upper_id}}) {
      GroupRecord rec;
      rec.parent = top.group;
      rec.created = k;
      detail::summarize_group(*members, y, w, rec);
      path.groups_.push_back(rec);
      for (std::size_t i : *members) path.leaf_of_[i] = id;
    }
    objective += path.groups_[lower_id].sum_squares + path.groups_[upper_id].sum_squares -
                 path.groups_[top.group].sum_squares;
    CutRecord record;
    record.k = k;
    record.value = top.value;
    record.parent = top.group;
    record.lower_group = lower_id;
    record.upper_group = upper_id;
    record.lower_size = top.cut.lower.size();
    record.upper_size = top.cut.upper.size();
    record.objective = std::max(objective, 0.0);
    path.cuts_.push_back(record);
    consider(lower_id, top.cut.lower);
    consider(upper_id, top.cut.upper);
  }
  return path;
}

inline IrpPath fit_path(const WeightedDataset& data, const DominanceDag& dag, const IrpConfig& config = {}) {
  if (data.empty()) throw ValidationError("cannot fit an empty dataset");
  const auto y = data.responses();
  const auto w = data.weights();
  return fit_path(y, w, dag, config);
}

inline IsotonicModel model_at(const IrpPath& path, std::size_t k) {
  const auto ids = path.group_ids_at(k);
  const auto groups = path.groups();
  std::vector<std::size_t> slot(groups.size(), kNoGroup);
  IsotonicModel model;
  model.k = k;
  model.objective = path.objective(k);
  model.group_of.resize(ids.size());
  // Groups ordered by id.
  std::vector<std::size_t> alive;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (slot[ids[i]] == kNoGroup) {
      slot[ids[i]] = 0;
      alive.push_back(ids[i]);
    }
  }
  std::sort(alive.begin(), alive.end());
  for (std::size_t s = 0; s < alive.size(); ++s) {
    slot[alive[s]] = s;
    model.fits.push_back(groups[alive[s]].fit);
  }
  model.groups.resize(alive.size());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    model.group_of[i] = slot[ids[i]];
    model.groups[slot[ids[i]]].push_back(i);
  }
  return model;
}

struct BlockClass {
  std::vector<std::vector<std::size_t>> blocks;
  std::vector<double> fits;
};

// The optimal isotonic block class at the end of a complete path.
inline BlockClass final_blocks(const IrpPath& path) {
  if (path.truncated()) {
    throw NumericalError("path was truncated after " + std::to_string(path.iterations()) +
                         " cuts; raise max_iterations to reach the optimal block class");
  }
  auto model = model_at(path, path.iterations());
  return {std::move(model.groups), std::move(model.fits)};
}

// ---------------------------------------------------------------------------
// Prediction

struct Prediction {
  double value = 0.0;
  // Neither a dominated nor a dominating training point exists.
  bool extrapolated = false;
};

// L = max fit over training points below x, U = min fit over training points
// above x. Returns (L + U) / 2, the one that exists, or the global weighted
// mean when x is incomparable to all training data.
inline Prediction predict(const IsotonicModel& model, std::span<const double> x, const WeightedDataset& data,
                          double global_mean) {
  if (x.size() != data.dim) {
    throw ValidationError("point has dimension " + std::to_string(x.size()) + ", model expects " +
                          std::to_string(data.dim));
  }
  double lower = -std::numeric_limits<double>::infinity();
  double upper = std::numeric_limits<double>::infinity();
  bool has_lower = false;
  bool has_upper = false;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto& p = data.point(i);
    if (dominated_by(p, x)) {
      has_lower = true;
      lower = std::max(lower, model.fitted(i));
    }
    if (dominated_by(x, p)) {
      has_upper = true;
      upper = std::min(upper, model.fitted(i));
    }
  }
  if (has_lower && has_upper) return {0.5 * (lower + upper), false};
  if (has_lower) return {lower, false};
  if (has_upper) return {upper, false};
  return {global_mean, true};
}

inline Prediction predict(const IsotonicModel& model, std::span<const double> x, const WeightedDataset& data) {
  double wsum = 0.0;
  double wysum = 0.0;
  for (const auto& obs : data.observations) {
    wsum += obs.weight;
    wysum += obs.weight * obs.response;
  }
  return predict(model, x, data, wysum / wsum);
}

// Bulk prediction for a fixed set of query points across many models of
// one path. Because every model on the path is isotonic, the max over the
// training points below a query equals the max over the maximal ones, so
// only those frontiers are stored.
class Predictor {
 public:
  Predictor(const WeightedDataset& train, const std::vector<std::vector<double>>& queries) {
    const std::size_t n = train.size();
    std::vector<std::size_t> lex(n);
    for (std::size_t i = 0; i < n; ++i) lex[i] = i;
    std::sort(lex.begin(), lex.end(), [&](std::size_t a, std::size_t b) { return train.point(a) < train.point(b); });
    below_.resize(queries.size());
    above_.resize(queries.size());
    std::vector<std::size_t> cand;
    for (std::size_t q = 0; q < queries.size(); ++q) {
      const auto& x = queries[q];
      if (x.size() != train.dim) throw ValidationError("query dimension mismatch");
      // maximal points below x: scan lex-descending
      cand.clear();
      for (auto it = lex.rbegin(); it != lex.rend(); ++it) {
        const auto& p = train.point(*it);
        if (!dominated_by(p, x)) continue;
        bool covered = false;
        for (std::size_t k : cand) {
          if (dominated_by(p, train.point(k))) {
            covered = true;
            break;
          }
        }
        if (!covered) cand.push_back(*it);
      }
      below_[q] = cand;
      // minimal points above x: scan lex-ascending
      cand.clear();
      for (std::size_t i : lex) {
        const auto& p = train.point(i);
        if (!dominated_by(x, p)) continue;
        bool covered = false;
        for (std::size_t k : cand) {
          if (dominated_by(train.point(k), p)) {
            covered = true;
            break;
          }
        }
        if (!covered) cand.push_back(i);
      }
      above_[q] = cand;
    }
  }

  [[nodiscard]] std::size_t size() const noexcept { return below_.size(); }

  // `fitted` holds the training fits of an isotonic model.
  [[nodiscard]] Prediction operator()(std::size_t q, std::span<const double> fitted, double global_mean) const {
    const auto& lo = below_[q];
    const auto& hi = above_[q];
    if (lo.empty() && hi.empty()) return {global_mean, true};
    double lower = -std::numeric_limits<double>::infinity();
    double upper = std::numeric_limits<double>::infinity();
    for (std::size_t i : lo) lower = std::max(lower, fitted[i]);
    for (std::size_t i : hi) upper = std::min(upper, fitted[i]);
    if (lo.empty()) return {upper, false};
    if (hi.empty()) return {lower, false};
    return {0.5 * (lower + upper), false};
  }

 private:
  std::vector<std::vector<std::size_t>> below_;
  std::vector<std::vector<std::size_t>> above_;
};

}  // namespace irp
