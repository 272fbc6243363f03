#pragma once

// Non-L2 isotonic problems reduced to the weighted L2 engine. For losses
// in the Barlow-Brunk class the optimal blocks coincide with those of an
// L2 problem on transformed data, so the whole path carries over.

#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "irp/dataset.hpp"
#include "irp/error.hpp"
#include "irp/path.hpp"

namespace irp {

enum class LossKind { l2, binary, poisson, maxwell_muckstadt };

inline std::string_view to_string(LossKind kind) {
  switch (kind) {
    case LossKind::l2: return "l2";
    case LossKind::binary: return "binary";
    case LossKind::poisson: return "poisson";
    case LossKind::maxwell_muckstadt: return "mm";
  }
  return "l2";
}

inline LossKind parse_loss(std::string_view name) {
  if (name == "l2") return LossKind::l2;
  if (name == "binary") return LossKind::binary;
  if (name == "poisson") return LossKind::poisson;
  if (name == "mm" || name == "maxwell_muckstadt") return LossKind::maxwell_muckstadt;
  throw ValidationError("unknown loss '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------
// Bernoulli

inline void check_binary(const WeightedDataset& data) {
  for (double v : data.source_responses) {
    if (v != 0.0 && v != 1.0) throw ValidationError("binary loss needs 0/1 responses");
  }
}

// Isotonic maximum likelihood for 0/1 responses. The maximizer of the
// Bernoulli log-likelihood over isotonic vectors is the L2 isotonic fit of
// the 0/1 data, so this is fit_path after validation.
inline IrpPath fit_binary(const WeightedDataset& data, const DominanceDag& dag, const IrpConfig& config = {}) {
  check_binary(data);
  return fit_path(data, dag, config);
}

// sum w_i [y_i log p_i + (1 - y_i) log(1 - p_i)] with 0 log 0 = 0. Merged
// observations carry the fraction of ones, which keeps the sum equal to
// the one over source rows.
inline double binary_log_likelihood(std::span<const double> fits, const WeightedDataset& data) {
  if (fits.size() != data.size()) throw ValidationError("one fit per observation required");
  double ll = 0.0;
  for (std::size_t i = 0; i < fits.size(); ++i) {
    const double p = fits[i];
    if (!(p >= 0.0 && p <= 1.0)) throw ValidationError("probability outside [0, 1]");
    const auto& obs = data.observations[i];
    if (obs.response > 0.0) ll += obs.weight * obs.response * std::log(p);
    if (obs.response < 1.0) ll += obs.weight * (1.0 - obs.response) * std::log1p(-p);
  }
  return ll;
}

// ---------------------------------------------------------------------------
// Poisson

inline void check_counts(const WeightedDataset& data) {
  for (double v : data.source_responses) {
    if (v < 0.0) throw ValidationError("poisson loss needs nonnegative counts");
  }
}

// Isotonic Poisson means. The block MLE is the block mean, so the fits are
// the L2 fits of the counts; all-zero blocks get mean 0.
inline IrpPath fit_poisson(const WeightedDataset& data, const DominanceDag& dag, const IrpConfig& config = {}) {
  check_counts(data);
  return fit_path(data, dag, config);
}

// sum w_i (y_i log mu_i - mu_i), with y log 0 = 0 when y = 0.
inline double poisson_log_likelihood(std::span<const double> means, const WeightedDataset& data) {
  if (means.size() != data.size()) throw ValidationError("one mean per observation required");
  double ll = 0.0;
  for (std::size_t i = 0; i < means.size(); ++i) {
    const double mu = means[i];
    if (!(mu >= 0.0)) throw ValidationError("poisson mean must be nonnegative");
    const auto& obs = data.observations[i];
    if (obs.response > 0.0) ll += obs.weight * obs.response * std::log(mu);
    ll -= obs.weight * mu;
  }
  return ll;
}

// ---------------------------------------------------------------------------
// Maxwell-Muckstadt reorder intervals
//
// minimize sum c_i / v_i + b_i v_i over isotonic v. Setting z_i = -b_i / c_i
// with weight c_i gives a weighted L2 problem whose block means are
// -sum b / sum c; the block optimum of the original problem is
// sqrt(sum c / sum b), so v = (-z)^(-1/2).

inline void check_mm(std::span<const double> c, std::span<const double> b) {
  if (c.size() != b.size()) throw ValidationError("c and b must have equal length");
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (!(c[i] > 0.0) || !(b[i] > 0.0) || !std::isfinite(c[i]) || !std::isfinite(b[i])) {
      throw ValidationError("maxwell-muckstadt constants must be positive and finite");
    }
  }
}

// Observations of the transformed L2 problem: response -b/c, weight c.
inline std::vector<Observation> maxwell_muckstadt_observations(const std::vector<std::vector<double>>& points,
                                                               std::span<const double> c,
                                                               std::span<const double> b) {
  check_mm(c, b);
  if (points.size() != c.size()) throw ValidationError("one (c, b) pair per point required");
  std::vector<Observation> out(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) out[i] = {points[i], -b[i] / c[i], c[i]};
  return out;
}

inline double mm_recover(double z) {
  if (!(z < 0.0)) throw NumericalError("transformed fit must be negative");
  return 1.0 / std::sqrt(-z);
}

inline std::vector<double> mm_recover(std::span<const double> z) {
  std::vector<double> out(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) out[i] = mm_recover(z[i]);
  return out;
}

inline double maxwell_muckstadt_objective(std::span<const double> c, std::span<const double> b,
                                          std::span<const double> v) {
  double total = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) total += c[i] / v[i] + b[i] * v[i];
  return total;
}

struct MaxwellMuckstadtFit {
  IrpPath path;                // path of the transformed L2 problem
  std::vector<double> values;  // recovered optimal v
  double objective = 0.0;
};

// `dag` orders the points that c and b belong to (pairwise distinct).
inline MaxwellMuckstadtFit fit_maxwell_muckstadt(std::span<const double> c, std::span<const double> b,
                                                 const DominanceDag& dag, const IrpConfig& config = {}) {
  check_mm(c, b);
  std::vector<double> z(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) z[i] = -b[i] / c[i];
  MaxwellMuckstadtFit fit;
  fit.path = fit_path(z, c, dag, config);
  fit.values = mm_recover(fit.path.fitted_at(fit.path.iterations()));
  fit.objective = maxwell_muckstadt_objective(c, b, fit.values);
  return fit;
}

}  // namespace irp
