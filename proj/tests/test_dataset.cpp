#include <gtest/gtest.h>

#include <sstream>

#include "support.hpp"

using namespace irp;

namespace {

CsvTable parse(const std::string& text) {
  std::istringstream in(text);
  return parse_csv(in);
}

std::vector<Observation> rows(std::initializer_list<std::pair<std::vector<double>, double>> items) {
  std::vector<Observation> out;
  for (const auto& [x, y] : items) out.push_back({x, y, 1.0});
  return out;
}

}  // namespace

TEST(Csv, HeaderAndRows) {
  const auto t = parse("x1,x2,y\n1,2,3\n4,5,6\n");
  ASSERT_EQ(t.header.size(), 3u);
  ASSERT_EQ(t.rows.size(), 2u);
  EXPECT_EQ(t.line_numbers[1], 3u);
  const auto obs = observations_from_table(t);
  EXPECT_EQ(obs[1].covariates, (std::vector<double>{4, 5}));
  EXPECT_EQ(obs[1].response, 6);
}

TEST(Csv, HeaderlessUsesLastColumn) {
  const auto obs = observations_from_table(parse("1,2,3\n"));
  ASSERT_EQ(obs.size(), 1u);
  EXPECT_EQ(obs[0].response, 3);
}

TEST(Csv, NamedWeightColumn) {
  const auto obs = observations_from_table(parse("w,x,y\n2,1,5\n"));
  EXPECT_EQ(obs[0].weight, 2);
  EXPECT_EQ(obs[0].covariates, std::vector<double>{1});
}

TEST(Csv, NonNumericFieldNamesLine) {
  try {
    parse("x1,x2,y\n0,1,2\n1,abc,3\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
}

TEST(Csv, RaggedRowRejected) { EXPECT_THROW(parse("1,2,3\n1,2\n"), ParseError); }

TEST(Csv, NonPositiveWeightRejected) {
  EXPECT_THROW(observations_from_table(parse("x,y,w\n1,2,0\n")), ValidationError);
}

TEST(Merge, PoolsIdenticalPoints) {
  const auto data = merge_duplicates(rows({{{1, 1}, 2}, {{0, 0}, 5}, {{1, 1}, 4}}));
  ASSERT_EQ(data.size(), 2u);
  EXPECT_EQ(data.point(0), (std::vector<double>{1, 1}));
  EXPECT_DOUBLE_EQ(data.observations[0].response, 3.0);
  EXPECT_DOUBLE_EQ(data.observations[0].weight, 2.0);
  EXPECT_EQ(data.provenance[0], (std::vector<std::size_t>{0, 2}));
  EXPECT_EQ(data.source_size(), 3u);
}

TEST(Merge, WeightedMean) {
  std::vector<Observation> raw{{{0}, 1, 1}, {{0}, 4, 3}};
  const auto data = merge_duplicates(raw);
  EXPECT_DOUBLE_EQ(data.observations[0].response, 13.0 / 4.0);
  EXPECT_DOUBLE_EQ(data.observations[0].weight, 4.0);
}

TEST(Merge, RejectsBadInput) {
  EXPECT_THROW(merge_duplicates({}), ValidationError);
  EXPECT_THROW(merge_duplicates(rows({{{0}, 1}, {{0, 1}, 1}})), ValidationError);
  std::vector<Observation> raw{{{0}, 1, -1}};
  EXPECT_THROW(merge_duplicates(raw), ValidationError);
}

TEST(Order, ChainReduction) {
  const std::vector<std::vector<double>> pts{{0}, {1}, {2}, {3}};
  const auto full = build_order(pts, false);
  const auto red = build_order(pts, true);
  EXPECT_EQ(full.edge_count(), 6u);
  EXPECT_EQ(red.edge_count(), 3u);
  EXPECT_TRUE(red.reduced());
}

TEST(Order, IncomparablePointsHaveNoEdges) {
  const auto dag = build_order(std::vector<std::vector<double>>{{0, 1}, {1, 0}}, true);
  EXPECT_EQ(dag.edge_count(), 0u);
}

TEST(Order, GridReductionKeepsCoverRelation) {
  std::vector<std::vector<double>> pts;
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) pts.push_back({double(a), double(b)});
  }
  const auto red = build_order(pts, true);
  // covers of a 3x3 grid: 2 * 3 * 2
  EXPECT_EQ(red.edge_count(), 12u);
  for (const auto& e : red.edges()) {
    const double step = (pts[e.to][0] - pts[e.from][0]) + (pts[e.to][1] - pts[e.from][1]);
    EXPECT_EQ(step, 1.0);
  }
}

TEST(Order, ReductionPreservesReachability) {
  Rng rng(3);
  for (int t = 0; t < 20; ++t) {
    check::InstanceSpec spec{40, 1 + rng.below(4), t % 2 == 0};
    auto data = merge_duplicates(check::random_rows(spec, rng));
    const auto full = build_order(data, false);
    const auto red = build_order(data, true);
    EXPECT_LE(red.edge_count(), full.edge_count());
    const auto closure = oracle::transitive_closure(red);
    std::size_t reach = 0;
    for (const auto& row : closure) reach += std::count(row.begin(), row.end(), 1);
    // the closure is reflexive
    EXPECT_EQ(reach, full.edge_count() + data.size());
    for (const auto& e : full.edges()) EXPECT_TRUE(closure[e.from][e.to]);
  }
}

TEST(Order, DefaultReduceRule) {
  auto data = merge_duplicates(rows({{{0.5, 0, 0, 0}, 1}}));
  EXPECT_FALSE(default_reduce(data));
  data = merge_duplicates(rows({{{2, 0, 1, 0}, 1}}));
  EXPECT_TRUE(default_reduce(data));
  data = merge_duplicates(rows({{{0.5, 0.25}, 1}}));
  EXPECT_TRUE(default_reduce(data));
}

TEST(Order, EdgeListExport) {
  std::ostringstream os;
  write_edge_list(os, build_order(std::vector<std::vector<double>>{{0}, {1}}, true));
  EXPECT_EQ(os.str(), "0 1\n");
}

TEST(Order, InvalidEdgeRejected) { EXPECT_THROW(DominanceDag(2, {{0, 2}}, false), ValidationError); }

TEST(Random, ReproducibleStreams) {
  Rng a(42), b(42), c(43);
  for (int i = 0; i < 100; ++i) {
    const double u = a.uniform();
    EXPECT_EQ(u, b.uniform());
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
  }
  EXPECT_NE(Rng(42).normal(), c.normal());
}

TEST(Random, FrozenValues) {
  // stream format version 1 must not drift across platforms or releases
  EXPECT_EQ(Rng::kVersion, 1);
  EXPECT_EQ(Rng(2024).engine()(), std::mt19937_64(2024)());
  Rng rng(2024);
  const double p[] = {0.7, 0.2, 0.1};
  EXPECT_EQ(rng.uniform(), 0.612684545263525);
  EXPECT_EQ(rng.normal(), -0.066581501933680731);
  EXPECT_EQ(rng.below(1000), 714u);
  EXPECT_EQ(rng.categorical(p), 0u);
}

TEST(Random, NormalMoments) {
  Rng rng(1);
  double s = 0, s2 = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    s += z;
    s2 += z * z;
  }
  EXPECT_NEAR(s / n, 0.0, 0.01);
  EXPECT_NEAR(s2 / n, 1.0, 0.02);
}
