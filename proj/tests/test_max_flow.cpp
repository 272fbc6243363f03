#include <gtest/gtest.h>

#include <sstream>

#include "support.hpp"

using namespace irp;

TEST(MaxFlow, SingleArc) {
  FlowNetwork net(2, 0, 1);
  net.add_arc(0, 1, 2.5);
  const auto r = max_flow(net);
  EXPECT_DOUBLE_EQ(r.value, 2.5);
  EXPECT_EQ(r.source_side, std::vector<std::size_t>{0});
}

TEST(MaxFlow, ClassicNetwork) {
  // CLRS figure: max flow 23
  FlowNetwork net(6, 0, 5);
  net.add_arc(0, 1, 16);
  net.add_arc(0, 2, 13);
  net.add_arc(1, 3, 12);
  net.add_arc(2, 1, 4);
  net.add_arc(2, 4, 14);
  net.add_arc(3, 2, 9);
  net.add_arc(3, 5, 20);
  net.add_arc(4, 3, 7);
  net.add_arc(4, 5, 4);
  const auto r = max_flow(net);
  EXPECT_DOUBLE_EQ(r.value, 23.0);
  EXPECT_EQ(r.source_side, (std::vector<std::size_t>{0, 1, 2, 4}));
}

TEST(MaxFlow, DisconnectedSink) {
  FlowNetwork net(3, 0, 2);
  net.add_arc(0, 1, 5);
  const auto r = max_flow(net);
  EXPECT_EQ(r.value, 0.0);
  EXPECT_EQ(r.source_side, (std::vector<std::size_t>{0, 1}));
}

TEST(MaxFlow, SourceSideIsMinimal) {
  // two equal cuts; the one next to the source is reported
  FlowNetwork net(3, 0, 2);
  net.add_arc(0, 1, 1);
  net.add_arc(1, 2, 1);
  EXPECT_EQ(max_flow(net).source_side, std::vector<std::size_t>{0});
}

TEST(MaxFlow, CutCapacityEqualsFlow) {
  Rng rng(9);
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = 2 + rng.below(12);
    FlowNetwork net(n, 0, n - 1);
    for (int a = 0; a < 30; ++a) {
      const auto u = rng.below(n), v = rng.below(n);
      if (u != v) net.add_arc(u, v, std::floor(rng.uniform(0, 10)));
    }
    const auto r = max_flow(net);
    std::vector<char> side(n, 0);
    for (auto v : r.source_side) side[v] = 1;
    EXPECT_TRUE(side[0]);
    EXPECT_FALSE(side[n - 1]);
    double cap = 0.0;
    for (const auto& a : net.arcs()) {
      if (side[a.from] && !side[a.to]) cap += a.capacity;
    }
    EXPECT_DOUBLE_EQ(cap, r.value);
  }
}

TEST(MaxFlow, BruteForceMinCut) {
  Rng rng(10);
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = 2 + rng.below(7);
    FlowNetwork net(n, 0, 1);
    for (int a = 0; a < 20; ++a) {
      const auto u = rng.below(n), v = rng.below(n);
      if (u != v) net.add_arc(u, v, rng.uniform(0, 5));
    }
    double best = std::numeric_limits<double>::infinity();
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
      if (!(mask & 1u) || (mask & 2u)) continue;
      double cap = 0.0;
      for (const auto& a : net.arcs()) {
        if ((mask >> a.from & 1u) && !(mask >> a.to & 1u)) cap += a.capacity;
      }
      best = std::min(best, cap);
    }
    EXPECT_NEAR(max_flow(net).value, best, 1e-9);
  }
}

TEST(MaxFlow, Validation) {
  EXPECT_THROW(FlowNetwork(2, 0, 0), ValidationError);
  FlowNetwork net(2, 0, 1);
  EXPECT_THROW(net.add_arc(0, 2, 1), ValidationError);
  EXPECT_THROW(net.add_arc(0, 1, -1), ValidationError);
}

TEST(MaxFlow, DimacsExport) {
  FlowNetwork net(2, 0, 1);
  net.add_arc(0, 1, 0.5);
  std::ostringstream os;
  write_dimacs(os, net);
  EXPECT_EQ(os.str(), "p max 2 1\nn 1 s\nn 2 t\na 1 2 0.5\n");
}
