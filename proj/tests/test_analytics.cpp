#include <gtest/gtest.h>

#include "support.hpp"

using namespace irp;

TEST(Simulate, ShapesAndReproducibility) {
  SimulationSpec spec{SimModel::ternary_product, 3, 50, 20, 1.0, 7};
  const auto a = simulate(spec);
  const auto b = simulate(spec);
  ASSERT_EQ(a.train.size(), 50u);
  ASSERT_EQ(a.test.size(), 20u);
  for (std::size_t i = 0; i < a.train.size(); ++i) {
    EXPECT_EQ(a.train[i].covariates, b.train[i].covariates);
    EXPECT_EQ(a.train[i].response, b.train[i].response);
    for (double v : a.train[i].covariates) EXPECT_TRUE(v == 0 || v == 1 || v == 2);
  }
  spec.seed = 8;
  EXPECT_NE(simulate(spec).train[0].response, a.train[0].response);
}

TEST(Simulate, CovariateRanges) {
  struct Case {
    SimModel m;
    double lo, hi;
  };
  for (const auto& c : {Case{SimModel::additive_squares, 0, 5}, Case{SimModel::product, 0, 3},
                        Case{SimModel::exponential, 0, 2}, Case{SimModel::df_continuous, 1, 2}}) {
    const auto sim = simulate({c.m, 2, 200, 0, 1.0, 1});
    for (const auto& r : sim.train) {
      for (double v : r.covariates) {
        EXPECT_GE(v, c.lo);
        EXPECT_LT(v, c.hi);
      }
    }
  }
}

TEST(Simulate, NoiselessMatchesTruth) {
  const auto sim = simulate({SimModel::exponential, 2, 30, 0, 0.0, 3});
  for (const auto& r : sim.train) EXPECT_DOUBLE_EQ(r.response, std::exp2(r.covariates[0] + r.covariates[1]));
}

TEST(Simulate, NoiseLevels) {
  EXPECT_DOUBLE_EQ(noise_sd(SimModel::additive_squares, 4), 8.0);
  EXPECT_DOUBLE_EQ(noise_sd(SimModel::ternary_subadditive, 10), std::sqrt(10.0));
  EXPECT_DOUBLE_EQ(noise_sd(SimModel::df_ternary, 3), std::sqrt(10.0));
  const auto sim = simulate({SimModel::product, 2, 20000, 0, 1.0, 4});
  double ss = 0;
  for (const auto& r : sim.train) {
    const double e = r.response - truth(SimModel::product, r.covariates);
    ss += e * e;
  }
  EXPECT_NEAR(std::sqrt(ss / 20000), 2.0, 0.05);
}

TEST(Simulate, SkewedTernaryFrequencies) {
  const auto sim = simulate({SimModel::ternary_subadditive, 1, 30000, 0, 1.0, 5});
  double counts[3] = {0, 0, 0};
  for (const auto& r : sim.train) counts[static_cast<int>(r.covariates[0])] += 1;
  EXPECT_NEAR(counts[0] / 30000, 0.7, 0.01);
  EXPECT_NEAR(counts[1] / 30000, 0.2, 0.01);
  EXPECT_NEAR(counts[2] / 30000, 0.1, 0.01);
}

TEST(Simulate, ModelNames) {
  EXPECT_EQ(parse_sim_model("5"), SimModel::ternary_product);
  EXPECT_EQ(parse_sim_model("ternary"), SimModel::df_ternary);
  EXPECT_THROW(parse_sim_model("9"), ValidationError);
  EXPECT_EQ(model_name(SimModel::df_continuous), "df-continuous");
}

TEST(LeastSquares, RecoversLinearTruth) {
  std::vector<Observation> rows;
  Rng rng(6);
  for (int i = 0; i < 50; ++i) {
    const double a = rng.uniform(), b = rng.uniform();
    rows.push_back({{a, b}, 1.5 + 2.0 * a - 0.5 * b, 1.0});
  }
  const auto model = fit_least_squares(merge_duplicates(rows));
  EXPECT_NEAR(model.intercept, 1.5, 1e-10);
  EXPECT_NEAR(model.slopes[0], 2.0, 1e-10);
  EXPECT_NEAR(model.slopes[1], -0.5, 1e-10);
}

TEST(LeastSquares, RankDeficientDesign) {
  std::vector<Observation> rows{{{1, 0}, 1, 1}, {{1, 1}, 2, 1}, {{1, 2}, 3, 1}};
  const auto model = fit_least_squares(merge_duplicates(rows));
  const std::vector<double> x{1, 3};
  EXPECT_NEAR(model(x), 4.0, 1e-10);
}

TEST(EvaluatePath, ReportConsistency) {
  const auto sim = simulate({SimModel::additive_squares, 2, 300, 200, 1.0, 11});
  const auto train = merge_duplicates(sim.train);
  const auto path = fit_path(train, build_order(train));
  const auto rep = evaluate_path(path, train, sim.test);
  ASSERT_EQ(rep.rmse.size(), path.iterations() + 1);
  EXPECT_EQ(rep.path_length, path.iterations());
  EXPECT_DOUBLE_EQ(rep.final_rmse, rep.rmse.back());
  EXPECT_DOUBLE_EQ(rep.min_rmse, rep.rmse[rep.min_iteration]);
  for (double r : rep.rmse) EXPECT_GE(r, rep.min_rmse);
  // M_0 predicts the training mean everywhere
  double mean = path.global_mean(), ss = 0;
  for (const auto& t : sim.test) ss += (t.response - mean) * (t.response - mean);
  EXPECT_NEAR(rep.rmse[0], std::sqrt(ss / sim.test.size()), 1e-9);
  EXPECT_THROW(evaluate_path(path, train, {}), ValidationError);
}

TEST(Df, ConstantModelHasOneDegree) {
  Rng rng(20);
  std::vector<std::vector<double>> x(50);
  for (auto& p : x) p = {rng.uniform(), rng.uniform()};
  auto zero = [](std::span<const double>) { return 0.0; };
  const auto est = estimate_df(x, zero, 1.0, 2000, 21);
  EXPECT_NEAR(est.df[0], 1.0, 0.15);
}

TEST(Df, ChainFinalDfTracksBlockCount) {
  std::vector<std::vector<double>> x(40);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = {double(i)};
  auto line = [](std::span<const double> p) { return 0.2 * p[0]; };
  const auto est = estimate_df(x, line, 1.0, 500, 22);
  EXPECT_LE(std::abs(est.df.back() - est.mean_final_blocks), 4.0 * est.final_gap_se);
  EXPECT_EQ(est.block_counts.size(), 500u);
}

TEST(Df, SerialAndParallelAgree) {
  const auto x = df_design(SimModel::df_ternary, 60, 2, 30);
  auto f = [](std::span<const double> p) { return truth(SimModel::df_ternary, p); };
  setenv("IRP_THREADS", "1", 1);
  const auto a = estimate_df(x, f, std::sqrt(10.0), 40, 31);
  setenv("IRP_THREADS", "4", 1);
  const auto b = estimate_df(x, f, std::sqrt(10.0), 40, 31);
  unsetenv("IRP_THREADS");
  EXPECT_EQ(a.df, b.df);
  EXPECT_EQ(a.block_counts, b.block_counts);
}

TEST(Df, RequiresReplications) {
  const auto x = df_design(SimModel::df_continuous, 10, 2, 1);
  auto f = [](std::span<const double>) { return 0.0; };
  EXPECT_THROW(estimate_df(x, f, 1.0, 1, 0), ValidationError);
  EXPECT_THROW(estimate_df(x, f, 0.0, 10, 0), ValidationError);
  EXPECT_THROW(df_design(SimModel::product, 10, 2, 1), ValidationError);
}

TEST(Auc, PerfectAndInverted) {
  const std::vector<double> s{0.1, 0.4, 0.35, 0.8};
  EXPECT_DOUBLE_EQ(auc(s, std::vector<int>{0, 1, 0, 1}), 1.0);
  EXPECT_DOUBLE_EQ(auc(s, std::vector<int>{1, 0, 1, 0}), 0.0);
}

TEST(Auc, TiesCountHalf) {
  EXPECT_DOUBLE_EQ(auc(std::vector<double>{0.5, 0.5}, std::vector<int>{0, 1}), 0.5);
  EXPECT_DOUBLE_EQ(auc(std::vector<double>{0.1, 0.4, 0.35, 0.8}, std::vector<int>{0, 0, 1, 1}), 0.75);
}

TEST(Auc, MatchesPairCounting) {
  Rng rng(40);
  for (int t = 0; t < 50; ++t) {
    const std::size_t n = 2 + rng.below(60);
    std::vector<double> s(n);
    std::vector<int> l(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = std::floor(rng.uniform(0, 5));
      l[i] = i < 1 ? 0 : i < 2 ? 1 : static_cast<int>(rng.below(2));
    }
    double wins = 0, pairs = 0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (l[i] == 1 && l[j] == 0) {
          pairs += 1;
          wins += s[i] > s[j] ? 1.0 : s[i] == s[j] ? 0.5 : 0.0;
        }
      }
    }
    EXPECT_NEAR(auc(s, l), wins / pairs, 1e-12);
  }
}

TEST(Auc, Errors) {
  EXPECT_THROW(auc(std::vector<double>{1, 2}, std::vector<int>{1, 1}), ValidationError);
  EXPECT_THROW(auc(std::vector<double>{1}, std::vector<int>{1, 0}), ValidationError);
  EXPECT_THROW(auc(std::vector<double>{1, 2}, std::vector<int>{2, 0}), ValidationError);
}

namespace {

IrpPath path_with_cut(std::size_t lower, std::size_t upper) {
  const std::size_t n = lower + upper;
  std::vector<double> y(n, 0.0);
  for (std::size_t i = lower; i < n; ++i) y[i] = 1.0;
  std::vector<double> w(n, 1.0);
  std::vector<std::vector<double>> pts(n);
  for (std::size_t i = 0; i < n; ++i) pts[i] = {double(i)};
  return fit_path(y, w, build_order(pts, true));
}

}  // namespace

TEST(SplitBalance, EvenSplit) {
  const auto s = split_balance_stats(path_with_cut(5, 5));
  ASSERT_TRUE(s.p_max);
  EXPECT_DOUBLE_EQ(*s.p_max, 0.5);
  EXPECT_DOUBLE_EQ(*s.bound_factor, 4.0 / 3.0);
}

TEST(SplitBalance, SkewedSplit) {
  const auto s = split_balance_stats(path_with_cut(99, 1));
  EXPECT_DOUBLE_EQ(*s.p_max, 0.99);
  EXPECT_NEAR(*s.bound_factor, 50.25, 0.01);
}

TEST(SplitBalance, EmptyPath) {
  const auto s = split_balance_stats(path_with_cut(3, 0));
  EXPECT_TRUE(s.p.empty());
  EXPECT_FALSE(s.p_max);
  EXPECT_FALSE(s.bound_factor);
}

TEST(KFold, BalancedAndReproducible) {
  const auto a = kfold_assignments(103, 5, 9);
  EXPECT_EQ(a, kfold_assignments(103, 5, 9));
  std::vector<int> counts(5, 0);
  for (auto f : a) ++counts[f];
  for (int c : counts) EXPECT_TRUE(c == 20 || c == 21);
  EXPECT_THROW(kfold_assignments(3, 5, 0), ValidationError);
}

TEST(KFold, CrossValidatedCurve) {
  const auto sim = simulate({SimModel::additive_squares, 2, 200, 0, 1.0, 12});
  const auto curve = cross_validate_path(sim.train, 5, 13);
  ASSERT_GT(curve.size(), 1u);
  EXPECT_LT(*std::min_element(curve.begin(), curve.end()), curve.front());
}

TEST(Benchmark, RowsAndSpread) {
  BenchmarkConfig cfg;
  cfg.models = {SimModel::additive_squares, SimModel::product};
  cfg.dims = {2, 4};
  cfg.reps = 2;
  cfg.n_train = 200;
  cfg.n_test = 100;
  cfg.seed = 3;
  const auto rows = run_benchmark(cfg);
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_TRUE(rows[0].irp_min_rmse.ci.has_value());
  EXPECT_EQ(rows[3].model, SimModel::product);
  EXPECT_EQ(rows[3].dim, 4u);
  cfg.reps = 1;
  const auto single = run_benchmark(cfg);
  EXPECT_FALSE(single[0].irp_min_rmse.ci.has_value());
  // replication 0 uses the same stream in both runs
  EXPECT_EQ(single[0].replications[0].min_rmse, rows[0].replications[0].min_rmse);
}

TEST(Benchmark, ModelFiveNearNoiseFloor) {
  const auto rep = run_replication(SimModel::ternary_product, 2, 3000, 1000, 5);
  EXPECT_GT(rep.min_rmse, 1.9);
  EXPECT_LT(rep.min_rmse, 2.15);
  EXPECT_LT(rep.path_length, 20u);
}
