#pragma once

// Commands behind the `irp` executable (compiled in src/cli.cpp). Each
// returns a process exit code; library errors propagate as exceptions and
// are mapped to codes by run().

#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <iostream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "irp/analytics.hpp"
#include "irp/dataset.hpp"
#include "irp/error.hpp"
#include "irp/losses.hpp"

namespace irp::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kData = 2, kNumerical = 3 };

inline constexpr std::size_t kVerifyLimit = 2000;

// Which model of a path to use.
struct Selection {
  enum class Kind { final, iteration, min_rmse } kind = Kind::final;
  std::size_t k = 0;
  std::string validation;  // CSV for min_rmse
};

Selection parse_selection(const std::string& text);

struct RunConfig {
  std::string command;
  std::string input;
  std::string output;   // "-" or empty writes to stdout where allowed
  std::string path;     // path JSON consumed by predict
  std::string summary;  // per-iteration CSV written by fit
  std::string test_output;
  LossKind loss = LossKind::l2;
  double tol = 1e-9;
  std::optional<std::size_t> max_iterations;
  std::string select = "final";
  std::optional<std::uint64_t> seed;
  bool reduce = true;
  bool verify = false;
  bool models = false;
  // simulation, df and benchmark parameters
  std::string model = "1";
  std::string design = "continuous";
  std::vector<std::string> model_list{"1"};
  std::vector<std::size_t> dims{2};
  std::size_t dim = 2;
  std::size_t n = 200;
  std::size_t reps = 20;
  std::size_t n_train = 3000;
  std::size_t n_test = 1000;
  std::string json;  // optional JSON copy of the benchmark report

  void validate() const {
    if (!(tol > 0.0) || !std::isfinite(tol)) throw UsageError("--tol must be positive");
    (void)parse_selection(select);
  }
};

int cmd_fit(const RunConfig& config, std::ostream& log);
int cmd_predict(const RunConfig& config, std::ostream& log);
int cmd_simulate(const RunConfig& config, std::ostream& log);
int cmd_df(const RunConfig& config, std::ostream& log);
int cmd_benchmark(const RunConfig& config, std::ostream& log);

// Simulated rows as CSV with header x1..xd,y.
void write_rows(std::ostream& os, const std::vector<Observation>& rows, std::size_t dim);
void write_benchmark_csv(std::ostream& os, const std::vector<BenchmarkRow>& rows);
nlohmann::json benchmark_json(const std::vector<BenchmarkRow>& rows);

// Dispatches a validated config and maps exceptions to exit codes.
int run(const RunConfig& config, std::ostream& log = std::cerr);

}  // namespace irp::cli
