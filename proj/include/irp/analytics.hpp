#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <numeric>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "irp/dataset.hpp"
#include "irp/error.hpp"
#include "irp/path.hpp"
#include "irp/random.hpp"

namespace irp {

// ---------------------------------------------------------------------------
// Parallel replications

// Worker count: hardware concurrency, capped by IRP_THREADS when set.
inline std::size_t thread_count() {
  std::size_t n = std::max<std::size_t>(1, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("IRP_THREADS")) {
    const long cap = std::strtol(env, nullptr, 10);
    if (cap >= 1) n = std::min(n, static_cast<std::size_t>(cap));
  }
  return n;
}

// Runs fn(i) for i in [0, count). Each index writes only its own output
// slot, so results do not depend on the worker count.
template <typename Fn>
void parallel_for(std::size_t count, Fn&& fn, std::size_t workers = thread_count()) {
  workers = std::min(workers, count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < workers; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

// ---------------------------------------------------------------------------
// Simulation models

enum class SimModel { additive_squares = 1, product = 2, exponential = 3, ternary_subadditive = 4,
                      ternary_product = 5, df_continuous = 6, df_ternary = 7 };

inline SimModel parse_sim_model(std::string_view name) {
  if (name == "1") return SimModel::additive_squares;
  if (name == "2") return SimModel::product;
  if (name == "3") return SimModel::exponential;
  if (name == "4") return SimModel::ternary_subadditive;
  if (name == "5") return SimModel::ternary_product;
  if (name == "df-continuous" || name == "continuous") return SimModel::df_continuous;
  if (name == "df-ternary" || name == "ternary") return SimModel::df_ternary;
  throw ValidationError("unknown simulation model '" + std::string(name) + "'");
}

inline std::string model_name(SimModel m) {
  switch (m) {
    case SimModel::df_continuous: return "df-continuous";
    case SimModel::df_ternary: return "df-ternary";
    default: return std::to_string(static_cast<int>(m));
  }
}

struct SimulationSpec {
  SimModel model = SimModel::additive_squares;
  std::size_t dim = 2;
  std::size_t n_train = 3000;
  std::size_t n_test = 1000;
  // Multiplies the model's noise standard deviation; 0 gives noiseless data.
  double noise_scale = 1.0;
  std::uint64_t seed = 0;
};

struct SimulatedData {
  std::vector<Observation> train;
  std::vector<Observation> test;
};

// Noise-free response of a model at x.
inline double truth(SimModel m, std::span<const double> x) {
  switch (m) {
    case SimModel::additive_squares:
    case SimModel::df_continuous:
    case SimModel::df_ternary: {
      double s = 0.0;
      for (double v : x) s += v * v;
      return s;
    }
    case SimModel::product:
    case SimModel::ternary_product: {
      double p = 1.0;
      for (double v : x) p *= v;
      return p;
    }
    case SimModel::exponential: {
      double s = 0.0;
      for (double v : x) s += v;
      return std::exp2(s);
    }
    case SimModel::ternary_subadditive: {
      double s = 0.0;
      for (double v : x) s += v;
      return std::pow(s, 0.25);
    }
  }
  throw ValidationError("unknown simulation model");
}

// Standard deviation of the additive Gaussian noise.
inline double noise_sd(SimModel m, std::size_t dim) {
  const double d = static_cast<double>(dim);
  switch (m) {
    case SimModel::additive_squares: return 2.0 * d;
    case SimModel::product:
    case SimModel::exponential:
    case SimModel::ternary_product: return d;
    case SimModel::ternary_subadditive: return d / std::sqrt(10.0);
    case SimModel::df_continuous:
    case SimModel::df_ternary: return std::sqrt(10.0);
  }
  throw ValidationError("unknown simulation model");
}

inline std::vector<double> draw_covariates(SimModel m, std::size_t dim, Rng& rng) {
  static constexpr double kSkewed[] = {0.7, 0.2, 0.1};
  static constexpr double kUniform3[] = {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
  std::vector<double> x(dim);
  for (auto& v : x) {
    switch (m) {
      case SimModel::additive_squares: v = rng.uniform(0.0, 5.0); break;
      case SimModel::product: v = rng.uniform(0.0, 3.0); break;
      case SimModel::exponential: v = rng.uniform(0.0, 2.0); break;
      case SimModel::df_continuous: v = rng.uniform(1.0, 2.0); break;
      case SimModel::ternary_subadditive: v = static_cast<double>(rng.categorical(kSkewed)); break;
      case SimModel::ternary_product:
      case SimModel::df_ternary: v = static_cast<double>(rng.categorical(kUniform3)); break;
    }
  }
  return x;
}

// Training rows first, then test rows, all from stream `seed`.
inline SimulatedData simulate(const SimulationSpec& spec) {
  if (spec.dim == 0) throw ValidationError("simulation dimension must be positive");
  if (spec.noise_scale < 0.0) throw ValidationError("noise scale must be nonnegative");
  Rng rng(spec.seed);
  const double sd = noise_sd(spec.model, spec.dim) * spec.noise_scale;
  auto draw = [&](std::size_t count) {
    std::vector<Observation> rows(count);
    for (auto& row : rows) {
      row.covariates = draw_covariates(spec.model, spec.dim, rng);
      row.response = truth(spec.model, row.covariates) + sd * rng.normal();
    }
    return rows;
  };
  SimulatedData out;
  out.train = draw(spec.n_train);
  out.test = draw(spec.n_test);
  return out;
}

// ---------------------------------------------------------------------------
// Least-squares baseline

struct LinearModel {
  double intercept = 0.0;
  std::vector<double> slopes;

  [[nodiscard]] double operator()(std::span<const double> x) const {
    double v = intercept;
    for (std::size_t k = 0; k < slopes.size(); ++k) v += slopes[k] * x[k];
    return v;
  }
};

// Weighted least squares with intercept; rank-deficient designs get the
// column-pivoted QR basic solution.
inline LinearModel fit_least_squares(const WeightedDataset& data) {
  const auto n = static_cast<Eigen::Index>(data.size());
  const auto d = static_cast<Eigen::Index>(data.dim);
  Eigen::MatrixXd x(n, d + 1);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& obs = data.observations[static_cast<std::size_t>(i)];
    const double s = std::sqrt(obs.weight);
    x(i, 0) = s;
    for (Eigen::Index k = 0; k < d; ++k) x(i, k + 1) = s * obs.covariates[static_cast<std::size_t>(k)];
    y(i) = s * obs.response;
  }
  const Eigen::VectorXd beta = x.colPivHouseholderQr().solve(y);
  LinearModel model;
  model.intercept = beta(0);
  model.slopes.assign(beta.data() + 1, beta.data() + beta.size());
  return model;
}

// ---------------------------------------------------------------------------
// Path evaluation

struct PathReport {
  std::vector<double> rmse;        // test RMSE of M_0 ... M_K
  double min_rmse = 0.0;
  std::size_t min_iteration = 0;   // first k attaining min_rmse
  double final_rmse = 0.0;         // the fully isotonic model M_K
  double ls_rmse = 0.0;
  std::size_t path_length = 0;     // K
};

inline PathReport evaluate_path(const IrpPath& path, const WeightedDataset& train, const std::vector<Observation>& test) {
  if (test.empty()) throw ValidationError("empty test set");
  std::vector<std::vector<double>> queries;
  queries.reserve(test.size());
  for (const auto& row : test) queries.push_back(row.covariates);
  const Predictor predictor(train, queries);
  const double mean = path.global_mean();

  PathReport report;
  report.path_length = path.iterations();
  report.rmse.resize(path.iterations() + 1);
  for (std::size_t k = 0; k <= path.iterations(); ++k) {
    const auto fitted = path.fitted_at(k);
    double ss = 0.0;
    for (std::size_t q = 0; q < test.size(); ++q) {
      const double r = predictor(q, fitted, mean).value - test[q].response;
      ss += r * r;
    }
    report.rmse[k] = std::sqrt(ss / static_cast<double>(test.size()));
  }
  const auto best = std::min_element(report.rmse.begin(), report.rmse.end());
  report.min_rmse = *best;
  report.min_iteration = static_cast<std::size_t>(best - report.rmse.begin());
  report.final_rmse = report.rmse.back();

  const LinearModel ls = fit_least_squares(train);
  double ss = 0.0;
  for (const auto& row : test) {
    const double r = ls(row.covariates) - row.response;
    ss += r * r;
  }
  report.ls_rmse = std::sqrt(ss / static_cast<double>(test.size()));
  return report;
}

// ---------------------------------------------------------------------------
// Degrees of freedom

struct DfEstimate {
  std::vector<double> df;            // df_k for k = 0 ... max path length
  std::size_t reps = 0;
  double sigma = 0.0;
  std::vector<std::vector<double>> design;
  std::vector<std::size_t> block_counts;  // final block count per replication
  double mean_final_blocks = 0.0;
  // Monte Carlo standard error of df_K - mean_final_blocks, from the paired
  // per-replication contributions.
  double final_gap_se = 0.0;
};

// df_k = sum_i cov(y_i, yhat_i^(k)) / sigma^2 over `reps` response draws on
// the fixed design, with the unbiased sample covariance. Replication r uses
// stream seed + r; a replication whose path is shorter than k contributes
// its final fits.
inline DfEstimate estimate_df(const std::vector<std::vector<double>>& design,
                              const std::function<double(std::span<const double>)>& truth_fn, double sigma,
                              std::size_t reps, std::uint64_t seed, const IrpConfig& config = {}) {
  if (reps < 2) throw ValidationError("degrees of freedom need at least 2 replications");
  if (design.empty()) throw ValidationError("empty design");
  if (!(sigma > 0.0)) throw ValidationError("sigma must be positive");
  const std::size_t n = design.size();

  std::vector<Observation> raw(n);
  std::vector<double> mu(n);
  for (std::size_t i = 0; i < n; ++i) {
    raw[i].covariates = design[i];
    mu[i] = truth_fn(design[i]);
  }
  const WeightedDataset layout = merge_duplicates(raw);
  const DominanceDag dag = build_order(layout);
  std::vector<std::size_t> merged_of(n);
  for (std::size_t g = 0; g < layout.size(); ++g) {
    for (std::size_t i : layout.provenance[g]) merged_of[i] = g;
  }

  std::vector<std::vector<double>> y(reps, std::vector<double>(n));
  std::vector<IrpPath> paths(reps);
  parallel_for(reps, [&](std::size_t r) {
    Rng rng(seed + r);
    for (std::size_t i = 0; i < n; ++i) y[r][i] = mu[i] + sigma * rng.normal();
    std::vector<double> ym(layout.size(), 0.0);
    for (std::size_t i = 0; i < n; ++i) ym[merged_of[i]] += y[r][i];
    const auto wm = layout.weights();
    for (std::size_t g = 0; g < layout.size(); ++g) ym[g] /= wm[g];
    paths[r] = fit_path(ym, wm, dag, config);
  });

  std::size_t longest = 0;
  for (const auto& p : paths) longest = std::max(longest, p.iterations());
  const double rd = static_cast<double>(reps);
  std::vector<double> ybar(n, 0.0);
  for (std::size_t r = 0; r < reps; ++r) {
    for (std::size_t i = 0; i < n; ++i) ybar[i] += y[r][i] / rd;
  }

  DfEstimate est;
  est.reps = reps;
  est.sigma = sigma;
  est.design = design;
  est.df.resize(longest + 1);
  std::vector<std::vector<double>> fits(reps, std::vector<double>(n));
  std::vector<double> fbar(n);
  std::vector<double> contribution(reps);
  for (std::size_t k = 0; k <= longest; ++k) {
    std::fill(fbar.begin(), fbar.end(), 0.0);
    for (std::size_t r = 0; r < reps; ++r) {
      const auto merged = paths[r].fitted_at(std::min(k, paths[r].iterations()));
      for (std::size_t i = 0; i < n; ++i) {
        fits[r][i] = merged[merged_of[i]];
        fbar[i] += fits[r][i] / rd;
      }
    }
    double total = 0.0;
    for (std::size_t r = 0; r < reps; ++r) {
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) s += (y[r][i] - ybar[i]) * (fits[r][i] - fbar[i]);
      contribution[r] = s / ((rd - 1.0) * sigma * sigma);
      total += contribution[r];
    }
    est.df[k] = total;
  }
  // contribution now holds the final-iteration terms; rescale to per-rep
  // estimates whose mean is df_K.
  est.block_counts.resize(reps);
  std::vector<double> gap(reps);
  for (std::size_t r = 0; r < reps; ++r) {
    est.block_counts[r] = paths[r].iterations() + 1;
    est.mean_final_blocks += static_cast<double>(est.block_counts[r]) / rd;
    gap[r] = contribution[r] * rd - static_cast<double>(est.block_counts[r]);
  }
  const double gap_mean = std::accumulate(gap.begin(), gap.end(), 0.0) / rd;
  double var = 0.0;
  for (double g : gap) var += (g - gap_mean) * (g - gap_mean);
  var /= rd - 1.0;
  est.final_gap_se = std::sqrt(var / rd);
  return est;
}

// Fixed design for the degrees-of-freedom experiments: U[1,2] or uniform
// ternary covariates.
inline std::vector<std::vector<double>> df_design(SimModel design, std::size_t n, std::size_t dim, std::uint64_t seed) {
  if (design != SimModel::df_continuous && design != SimModel::df_ternary) {
    throw ValidationError("degrees-of-freedom design must be df-continuous or df-ternary");
  }
  Rng rng(seed);
  std::vector<std::vector<double>> x(n);
  for (auto& row : x) row = draw_covariates(design, dim, rng);
  return x;
}

// ---------------------------------------------------------------------------
// Classification and split statistics

// Mann-Whitney AUC; tied scores across classes count one half.
inline double auc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw ValidationError("scores and labels differ in length");
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  double positives = 0.0;
  double rank_sum = 0.0;
  for (std::size_t lo = 0; lo < n;) {
    std::size_t hi = lo;
    while (hi < n && scores[order[hi]] == scores[order[lo]]) ++hi;
    const double avg_rank = 0.5 * static_cast<double>(lo + 1 + hi);
    for (std::size_t k = lo; k < hi; ++k) {
      if (labels[order[k]] != 0 && labels[order[k]] != 1) throw ValidationError("labels must be 0 or 1");
      if (labels[order[k]] == 1) {
        positives += 1.0;
        rank_sum += avg_rank;
      }
    }
    lo = hi;
  }
  const double negatives = static_cast<double>(n) - positives;
  if (positives == 0.0 || negatives == 0.0) throw ValidationError("auc needs both classes");
  return (rank_sum - positives * (positives + 1.0) / 2.0) / (positives * negatives);
}

struct SplitBalance {
  std::vector<double> p;  // larger side fraction of each executed cut
  std::optional<double> p_max;
  // 1 / (1 - p_max^2), the constant in the O(n^3) total-work bound.
  std::optional<double> bound_factor;
};

inline SplitBalance split_balance_stats(const IrpPath& path) {
  SplitBalance out;
  for (const auto& cut : path.cuts()) {
    const double a = static_cast<double>(cut.lower_size);
    const double b = static_cast<double>(cut.upper_size);
    out.p.push_back(std::max(a, b) / (a + b));
  }
  if (!out.p.empty()) {
    out.p_max = *std::max_element(out.p.begin(), out.p.end());
    out.bound_factor = 1.0 / (1.0 - *out.p_max * *out.p_max);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Cross-validation

// Balanced random fold labels in [0, folds).
inline std::vector<std::size_t> kfold_assignments(std::size_t n, std::size_t folds, std::uint64_t seed) {
  if (folds < 2 || folds > n) throw ValidationError("fold count must be in [2, n]");
  std::vector<std::size_t> label(n);
  for (std::size_t i = 0; i < n; ++i) label[i] = i % folds;
  Rng rng(seed);
  for (std::size_t i = n; i > 1; --i) std::swap(label[i - 1], label[rng.below(i)]);
  return label;
}

// Mean held-out RMSE of M_k for every k, pooling squared errors over folds.
// A fold whose path ends before k contributes its final model.
inline std::vector<double> cross_validate_path(const std::vector<Observation>& rows, std::size_t folds,
                                               std::uint64_t seed, const IrpConfig& config = {}) {
  const auto label = kfold_assignments(rows.size(), folds, seed);
  std::vector<std::vector<double>> fold_sse(folds);
  for (std::size_t f = 0; f < folds; ++f) {
    std::vector<Observation> train;
    std::vector<Observation> held;
    for (std::size_t i = 0; i < rows.size(); ++i) (label[i] == f ? held : train).push_back(rows[i]);
    const auto data = merge_duplicates(train);
    const auto dag = build_order(data);
    const auto path = fit_path(data, dag, config);
    std::vector<std::vector<double>> queries;
    for (const auto& h : held) queries.push_back(h.covariates);
    const Predictor predictor(data, queries);
    for (std::size_t k = 0; k <= path.iterations(); ++k) {
      const auto fitted = path.fitted_at(k);
      double sse = 0.0;
      for (std::size_t q = 0; q < held.size(); ++q) {
        const double r = predictor(q, fitted, path.global_mean()).value - held[q].response;
        sse += r * r;
      }
      fold_sse[f].push_back(sse);
    }
  }
  std::size_t longest = 0;
  for (const auto& s : fold_sse) longest = std::max(longest, s.size());
  std::vector<double> rmse(longest);
  for (std::size_t k = 0; k < longest; ++k) {
    double sse = 0.0;
    for (const auto& s : fold_sse) sse += s[std::min(k, s.size() - 1)];
    rmse[k] = std::sqrt(sse / static_cast<double>(rows.size()));
  }
  return rmse;
}

// ---------------------------------------------------------------------------
// Benchmark table

struct BenchmarkConfig {
  std::vector<SimModel> models{SimModel::additive_squares};
  std::vector<std::size_t> dims{2};
  std::size_t reps = 20;
  std::size_t n_train = 3000;
  std::size_t n_test = 1000;
  std::uint64_t seed = 0;
  IrpConfig irp;
};

struct Summary {
  double mean = 0.0;
  std::optional<double> ci;  // 2 sd / sqrt(reps); absent for a single replication
};

inline Summary summarize(std::span<const double> values) {
  Summary s;
  const double n = static_cast<double>(values.size());
  for (double v : values) s.mean += v / n;
  if (values.size() > 1) {
    double var = 0.0;
    for (double v : values) var += (v - s.mean) * (v - s.mean);
    var /= n - 1.0;
    s.ci = 2.0 * std::sqrt(var / n);
  }
  return s;
}

struct BenchmarkRow {
  SimModel model{};
  std::size_t dim = 0;
  std::size_t reps = 0;
  std::size_t n_train = 0;
  std::size_t n_test = 0;
  Summary irp_min_rmse;
  Summary isotonic_rmse;
  Summary ls_rmse;
  double irp_min_path = 0.0;  // mean over replications
  double path_length = 0.0;   // mean over replications
  std::vector<PathReport> replications;
};

inline PathReport run_replication(SimModel model, std::size_t dim, std::size_t n_train, std::size_t n_test,
                                  std::uint64_t seed, const IrpConfig& config = {}) {
  SimulationSpec spec{model, dim, n_train, n_test, 1.0, seed};
  const auto sim = simulate(spec);
  const auto train = merge_duplicates(sim.train);
  const auto dag = build_order(train);
  const auto path = fit_path(train, dag, config);
  return evaluate_path(path, train, sim.test);
}

inline std::vector<BenchmarkRow> run_benchmark(const BenchmarkConfig& config) {
  if (config.reps == 0) throw ValidationError("benchmark needs at least one replication");
  std::vector<BenchmarkRow> rows;
  for (SimModel model : config.models) {
    for (std::size_t dim : config.dims) {
      BenchmarkRow row;
      row.model = model;
      row.dim = dim;
      row.reps = config.reps;
      row.n_train = config.n_train;
      row.n_test = config.n_test;
      row.replications.resize(config.reps);
      parallel_for(config.reps, [&](std::size_t r) {
        row.replications[r] = run_replication(model, dim, config.n_train, config.n_test, config.seed + r, config.irp);
      });
      std::vector<double> mins, finals, ls;
      for (const auto& rep : row.replications) {
        mins.push_back(rep.min_rmse);
        finals.push_back(rep.final_rmse);
        ls.push_back(rep.ls_rmse);
        row.irp_min_path += static_cast<double>(rep.min_iteration) / static_cast<double>(config.reps);
        row.path_length += static_cast<double>(rep.path_length) / static_cast<double>(config.reps);
      }
      row.irp_min_rmse = summarize(mins);
      row.isotonic_rmse = summarize(finals);
      row.ls_rmse = summarize(ls);
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

}  // namespace irp
