#include <CLI11.hpp>

#include <iostream>

#include "irp/cli.hpp"

int main(int argc, char** argv) {
  using irp::cli::RunConfig;
  RunConfig config;
  std::string loss = "l2";
  std::uint64_t seed = 0;
  std::optional<std::size_t> max_iterations;

  CLI::App app{"Isotonic recursive partitioning"};
  app.require_subcommand(1);

  auto add_fit_options = [&](CLI::App* cmd) {
    cmd->add_option("--tol", config.tol, "relative tolerance for trivial cuts");
    cmd->add_option("--max-iterations", max_iterations, "cap on executed cuts");
  };
  auto add_seed = [&](CLI::App* cmd) { cmd->add_option("--seed", seed, "random seed (required)")->required(); };

  auto* fit = app.add_subcommand("fit", "fit the regularization path of a CSV file");
  fit->add_option("--input", config.input, "training CSV")->required();
  fit->add_option("--output", config.output, "path JSON to write")->required();
  fit->add_option("--summary", config.summary, "per-iteration CSV (k, cut value, RSS, groups)");
  fit->add_option("--loss", loss, "l2, binary, poisson or mm")
      ->check(CLI::IsMember({"l2", "binary", "poisson", "mm"}));
  fit->add_flag("--no-reduce", [&](std::int64_t) { config.reduce = false; }, "keep the full dominance relation");
  fit->add_flag("--verify", config.verify, "compare final fits with an independent projection solver");
  fit->add_flag("--models", config.models, "store every model's group membership in the JSON");
  add_fit_options(fit);

  auto* predict = app.add_subcommand("predict", "predict with a stored path");
  predict->add_option("--path", config.path, "path JSON from fit")->required();
  predict->add_option("--input", config.input, "CSV of query points")->required();
  predict->add_option("--output", config.output, "predictions CSV (default stdout)");
  predict->add_option("--select", config.select, "final, k=<int> or min-rmse:<validation csv>");

  auto* simulate = app.add_subcommand("simulate", "draw train and test data from a simulation model");
  simulate->add_option("--model", config.model, "1-5, df-continuous or df-ternary");
  simulate->add_option("--dim", config.dim, "covariate dimension");
  simulate->add_option("--n-train", config.n_train);
  simulate->add_option("--n-test", config.n_test);
  simulate->add_option("--output", config.output, "training CSV (default stdout)");
  simulate->add_option("--test-output", config.test_output, "test CSV");
  add_seed(simulate);

  auto* df = app.add_subcommand("df", "Monte Carlo degrees of freedom along the path");
  df->add_option("--design", config.design, "continuous or ternary");
  df->add_option("--dim", config.dim);
  df->add_option("--n", config.n, "design size");
  df->add_option("--reps", config.reps, "response replications")->default_val(400);
  df->add_option("--output", config.output, "CSV of (k, df) (default stdout)");
  add_fit_options(df);
  add_seed(df);

  auto* bench = app.add_subcommand("benchmark", "test RMSE table over models and dimensions");
  bench->add_option("--models", config.model_list, "comma-separated model ids")->delimiter(',');
  bench->add_option("--dims", config.dims, "comma-separated dimensions")->delimiter(',');
  bench->add_option("--reps", config.reps);
  bench->add_option("--n-train", config.n_train);
  bench->add_option("--n-test", config.n_test);
  bench->add_option("--output", config.output, "CSV report (default stdout)");
  bench->add_option("--json", config.json, "JSON report");
  add_fit_options(bench);
  add_seed(bench);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : irp::cli::kUsage;
  }

  config.command = app.get_subcommands().front()->get_name();
  config.max_iterations = max_iterations;
  auto* chosen = app.get_subcommands().front();
  if (chosen == simulate || chosen == df || chosen == bench) config.seed = seed;
  try {
    config.loss = irp::parse_loss(loss);
  } catch (const irp::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return irp::cli::kUsage;
  }
  return irp::cli::run(config);
}
