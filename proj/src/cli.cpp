#include "irp/cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <memory>

#include "irp/dataset.hpp"
#include "irp/io.hpp"
#include "irp/losses.hpp"
#include "irp/oracles.hpp"
#include "irp/path.hpp"

namespace irp::cli {

Selection parse_selection(const std::string& text) {
  Selection s;
  if (text.empty() || text == "final") return s;
  if (text.rfind("k=", 0) == 0) {
    const std::string digits = text.substr(2);
    if (digits.empty() || digits.find_first_not_of("0123456789") != std::string::npos) {
      throw UsageError("bad selection '" + text + "'; expected k=<int>");
    }
    s.kind = Selection::Kind::iteration;
    s.k = std::stoull(digits);
    return s;
  }
  if (text.rfind("min-rmse:", 0) == 0 && text.size() > 9) {
    s.kind = Selection::Kind::min_rmse;
    s.validation = text.substr(9);
    return s;
  }
  throw UsageError("bad selection '" + text + "'; expected final, k=<int> or min-rmse:<file>");
}

namespace detail {

// Output stream for `file`, or stdout for "" and "-".
class Sink {
 public:
  explicit Sink(const std::string& file) {
    if (file.empty() || file == "-") return;
    file_ = std::make_unique<std::ofstream>(file);
    if (!*file_) throw ValidationError("cannot open '" + file + "' for writing");
  }
  std::ostream& operator*() { return file_ ? *file_ : std::cout; }

 private:
  std::unique_ptr<std::ofstream> file_;
};

std::uint64_t require_seed(const RunConfig& config) {
  if (!config.seed) throw UsageError(config.command + " requires --seed");
  return *config.seed;
}

IrpConfig irp_config(const RunConfig& config) { return {config.tol, config.max_iterations}; }

// Training data for `loss`. For the Maxwell-Muckstadt loss the trailing
// two columns (or columns named c and b) hold the constants.
std::vector<Observation> load_training(const RunConfig& config) {
  const CsvTable table = read_csv_table(config.input);
  if (config.loss != LossKind::maxwell_muckstadt) return observations_from_table(table);
  std::size_t width = table.header.empty() ? (table.rows.empty() ? 0 : table.rows.front().size()) : table.header.size();
  if (width < 3) throw ValidationError("maxwell-muckstadt input needs covariates plus c and b columns");
  std::size_t ci = width - 2;
  std::size_t bi = width - 1;
  for (std::size_t k = 0; k < table.header.size(); ++k) {
    if (table.header[k] == "c") ci = k;
    if (table.header[k] == "b") bi = k;
  }
  std::vector<std::vector<double>> points;
  std::vector<double> c;
  std::vector<double> b;
  for (const auto& row : table.rows) {
    std::vector<double> x;
    for (std::size_t k = 0; k < width; ++k) {
      if (k != ci && k != bi) x.push_back(row[k] == 0.0 ? 0.0 : row[k]);
    }
    points.push_back(std::move(x));
    c.push_back(row[ci]);
    b.push_back(row[bi]);
  }
  return maxwell_muckstadt_observations(points, c, b);
}

// Covariates of a prediction file: exactly d columns, or d plus trailing
// columns that are ignored (responses, or c and b).
std::vector<std::vector<double>> load_queries(const std::string& file, std::size_t dim,
                                                     std::vector<double>* responses = nullptr) {
  const CsvTable table = read_csv_table(file);
  std::vector<std::vector<double>> out;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    if (row.size() < dim || (responses && row.size() != dim + 1)) {
      throw ValidationError("line " + std::to_string(table.line_numbers[r]) + ": expected " +
                            std::to_string(responses ? dim + 1 : dim) + " columns, found " +
                            std::to_string(row.size()));
    }
    std::vector<double> x(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(dim));
    for (auto& v : x) v = v == 0.0 ? 0.0 : v;
    out.push_back(std::move(x));
    if (responses) responses->push_back(row[dim]);
  }
  return out;
}

double rmse_at(const SavedPath& saved, const Predictor& predictor, std::size_t k, std::span<const double> y) {
  const auto fitted = saved.path.fitted_at(k);
  double ss = 0.0;
  for (std::size_t q = 0; q < y.size(); ++q) {
    const double p = irp::detail::reported(saved.loss, predictor(q, fitted, saved.path.global_mean()).value);
    ss += (p - y[q]) * (p - y[q]);
  }
  return std::sqrt(ss / static_cast<double>(y.size()));
}

}  // namespace detail

int cmd_fit(const RunConfig& config, std::ostream& log) {
  if (config.input.empty() || config.output.empty()) throw UsageError("fit requires --input and --output");
  const auto raw = detail::load_training(config);
  SavedPath saved;
  saved.loss = config.loss;
  saved.tol = config.tol;
  saved.data = merge_duplicates(raw);
  if (config.verify && saved.data.size() > kVerifyLimit) {
    throw UsageError("--verify is limited to n <= " + std::to_string(kVerifyLimit));
  }
  if (config.loss == LossKind::binary) check_binary(saved.data);
  if (config.loss == LossKind::poisson) check_counts(saved.data);
  const auto dag = build_order(saved.data, config.reduce);
  saved.path = fit_path(saved.data, dag, detail::irp_config(config));
  write_path(config.output, saved, config.models);

  const auto& path = saved.path;
  log << "fit: n=" << saved.data.size() << " d=" << saved.data.dim << " edges=" << dag.edge_count()
      << " iterations=" << path.iterations() << (path.truncated() ? " (truncated)" : "") << '\n';
  if (!config.summary.empty()) {
    detail::Sink sink(config.summary);
    auto& os = *sink;
    os << "k,cut_value,rss,groups\n";
    for (std::size_t k = 0; k <= path.iterations(); ++k) {
      os << k << ',';
      if (k > 0) csv_number(os, path.cuts()[k - 1].value);
      os << ',';
      csv_number(os, path.objective(k)) << ',' << k + 1 << '\n';
    }
  }
  if (config.loss == LossKind::binary && !path.truncated()) {
    log << "binary log-likelihood: " << std::setprecision(12)
        << binary_log_likelihood(path.fitted_at(path.iterations()), saved.data) << '\n';
  }

  if (config.verify) {
    const auto blocks = final_blocks(path);
    const auto fits = path.fitted_at(path.iterations());
    const auto y = saved.data.responses();
    const auto w = saved.data.weights();
    const auto oracle = oracle::dykstra_project(y, w, dag);
    double scale = 1.0;
    for (double v : y) scale = std::max(scale, std::abs(v));
    double dev = 0.0;
    for (std::size_t i = 0; i < fits.size(); ++i) dev = std::max(dev, std::abs(fits[i] - oracle.fits[i]));
    log << "verify: blocks=" << blocks.blocks.size() << " max deviation=" << std::setprecision(3) << dev / scale
        << " (relative)" << (oracle.converged ? "" : ", reference did not converge") << '\n';
    if (!oracle.converged || dev > 1e-6 * scale) return kNumerical;
  }
  return kOk;
}

int cmd_predict(const RunConfig& config, std::ostream& log) {
  if (config.path.empty() || config.input.empty()) throw UsageError("predict requires --path and --input");
  const SavedPath saved = read_path(config.path);
  const Selection sel = parse_selection(config.select);
  const auto& path = saved.path;

  std::size_t k = path.iterations();
  if (sel.kind == Selection::Kind::iteration) {
    if (sel.k > path.iterations()) {
      throw UsageError("k=" + std::to_string(sel.k) + " exceeds path length " + std::to_string(path.iterations()));
    }
    k = sel.k;
  } else if (sel.kind == Selection::Kind::min_rmse) {
    std::vector<double> y;
    const auto val = detail::load_queries(sel.validation, saved.data.dim, &y);
    if (val.empty()) throw ValidationError("empty validation file");
    const Predictor predictor(saved.data, val);
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j <= path.iterations(); ++j) {
      const double r = detail::rmse_at(saved, predictor, j, y);
      if (r < best) {
        best = r;
        k = j;
      }
    }
    log << "selected k=" << k << " (validation rmse " << std::setprecision(6) << best << ")\n";
  }

  const auto queries = detail::load_queries(config.input, saved.data.dim);
  const Predictor predictor(saved.data, queries);
  const auto fitted = path.fitted_at(k);
  detail::Sink sink(config.output);
  auto& os = *sink;
  os << "row,prediction,extrapolated\n";
  std::size_t extrapolated = 0;
  for (std::size_t q = 0; q < queries.size(); ++q) {
    const auto p = predictor(q, fitted, path.global_mean());
    extrapolated += p.extrapolated ? 1 : 0;
    os << q << ',';
    csv_number(os, irp::detail::reported(saved.loss, p.value)) << ',' << (p.extrapolated ? 1 : 0) << '\n';
  }
  if (extrapolated > 0) log << "predict: " << extrapolated << " rows incomparable to all training points\n";
  return kOk;
}

void write_rows(std::ostream& os, const std::vector<Observation>& rows, std::size_t dim) {
  for (std::size_t k = 0; k < dim; ++k) os << 'x' << k + 1 << ',';
  os << "y\n";
  for (const auto& row : rows) {
    for (double v : row.covariates) csv_number(os, v) << ',';
    csv_number(os, row.response) << '\n';
  }
}

int cmd_simulate(const RunConfig& config, std::ostream& /*log*/) {
  SimulationSpec spec;
  spec.model = parse_sim_model(config.model);
  spec.dim = config.dim;
  spec.n_train = config.n_train;
  spec.n_test = config.n_test;
  spec.seed = detail::require_seed(config);
  const auto sim = simulate(spec);
  {
    detail::Sink sink(config.output);
    write_rows(*sink, sim.train, spec.dim);
  }
  if (!config.test_output.empty()) {
    detail::Sink sink(config.test_output);
    write_rows(*sink, sim.test, spec.dim);
  }
  return kOk;
}

// The design is drawn from stream `seed`; replication r uses seed + 1 + r.
int cmd_df(const RunConfig& config, std::ostream& log) {
  const std::uint64_t seed = detail::require_seed(config);
  const SimModel design = parse_sim_model(config.design == "continuous" || config.design == "ternary"
                                              ? "df-" + config.design
                                              : config.design);
  const auto x = df_design(design, config.n, config.dim, seed);
  const auto est = estimate_df(
      x, [design](std::span<const double> p) { return truth(design, p); }, noise_sd(design, config.dim),
      config.reps, seed + 1, detail::irp_config(config));
  detail::Sink sink(config.output);
  auto& os = *sink;
  os << "k,df\n";
  for (std::size_t k = 0; k < est.df.size(); ++k) {
    os << k << ',';
    csv_number(os, est.df[k]) << '\n';
  }
  log << "df: final=" << std::setprecision(6) << est.df.back() << " mean blocks=" << est.mean_final_blocks
      << " se(gap)=" << est.final_gap_se << '\n';
  return kOk;
}

void write_benchmark_csv(std::ostream& os, const std::vector<BenchmarkRow>& rows) {
  os << "model,dim,reps,n_train,n_test,irp_min_rmse,irp_min_rmse_ci,isotonic_rmse,isotonic_rmse_ci,"
        "ls_rmse,ls_rmse_ci,irp_min_path,path_length\n";
  auto summary = [&](const Summary& s) {
    csv_number(os, s.mean) << ',';
    if (s.ci) csv_number(os, *s.ci);
    os << ',';
  };
  for (const auto& r : rows) {
    os << model_name(r.model) << ',' << r.dim << ',' << r.reps << ',' << r.n_train << ',' << r.n_test << ',';
    summary(r.irp_min_rmse);
    summary(r.isotonic_rmse);
    summary(r.ls_rmse);
    csv_number(os, r.irp_min_path) << ',';
    csv_number(os, r.path_length) << '\n';
  }
}

nlohmann::json benchmark_json(const std::vector<BenchmarkRow>& rows) {
  auto summary = [](const Summary& s) {
    nlohmann::json j{{"mean", s.mean}};
    if (s.ci) j["ci"] = *s.ci;
    return j;
  };
  nlohmann::json out = nlohmann::json::array();
  for (const auto& r : rows) {
    nlohmann::json reps = nlohmann::json::array();
    for (const auto& rep : r.replications) {
      reps.push_back({{"min_rmse", rep.min_rmse},
                      {"min_iteration", rep.min_iteration},
                      {"isotonic_rmse", rep.final_rmse},
                      {"ls_rmse", rep.ls_rmse},
                      {"path_length", rep.path_length}});
    }
    out.push_back({{"model", model_name(r.model)},
                   {"dim", r.dim},
                   {"reps", r.reps},
                   {"n_train", r.n_train},
                   {"n_test", r.n_test},
                   {"irp_min_rmse", summary(r.irp_min_rmse)},
                   {"isotonic_rmse", summary(r.isotonic_rmse)},
                   {"ls_rmse", summary(r.ls_rmse)},
                   {"irp_min_path", r.irp_min_path},
                   {"path_length", r.path_length},
                   {"replications", std::move(reps)}});
  }
  return out;
}

int cmd_benchmark(const RunConfig& config, std::ostream& log) {
  BenchmarkConfig bench;
  bench.seed = detail::require_seed(config);
  bench.models.clear();
  for (const auto& m : config.model_list) bench.models.push_back(parse_sim_model(m));
  bench.dims = config.dims;
  bench.reps = config.reps;
  bench.n_train = config.n_train;
  bench.n_test = config.n_test;
  bench.irp = detail::irp_config(config);
  const auto rows = run_benchmark(bench);
  {
    detail::Sink sink(config.output);
    write_benchmark_csv(*sink, rows);
  }
  if (!config.json.empty()) {
    detail::Sink sink(config.json);
    *sink << benchmark_json(rows).dump(1) << '\n';
  }
  log << "benchmark: " << rows.size() << " rows, threads=" << thread_count() << '\n';
  return kOk;
}

int run(const RunConfig& config, std::ostream& log) {
  try {
    config.validate();
    if (config.command == "fit") return cmd_fit(config, log);
    if (config.command == "predict") return cmd_predict(config, log);
    if (config.command == "simulate") return cmd_simulate(config, log);
    if (config.command == "df") return cmd_df(config, log);
    if (config.command == "benchmark") return cmd_benchmark(config, log);
    throw UsageError("unknown command '" + config.command + "'");
  } catch (const UsageError& e) {
    log << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const NumericalError& e) {
    log << "error: " << e.what() << '\n';
    return kNumerical;
  } catch (const Error& e) {
    log << "error: " << e.what() << '\n';
    return kData;
  }
}

}  // namespace irp::cli
