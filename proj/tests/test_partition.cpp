#include <gtest/gtest.h>

#include <random>
#include <set>

#include "dcskel/partition.hpp"
#include "oracles.hpp"

using namespace dcskel;

namespace {

Skeleton from_edges(int p, std::initializer_list<std::pair<int, int>> edges) {
  Skeleton g(p);
  for (auto [a, b] : edges) g.add_edge(a, b);
  return g;
}

Skeleton barbell() {
  Skeleton g(8);
  for (int base : {0, 4})
    for (int i = 0; i < 4; ++i)
      for (int j = i + 1; j < 4; ++j) g.add_edge(base + i, base + j);
  g.add_edge(3, 4);
  return g;
}

Skeleton path(int p) {
  Skeleton g(p);
  for (int v = 0; v + 1 < p; ++v) g.add_edge(v, v + 1);
  return g;
}

PartitionConfig max_size(int k) {
  PartitionConfig cfg;
  cfg.max_block_size = k;
  return cfg;
}

}  // namespace

TEST(EdgeBetweenness, MatchesShortestPathEnumeration) {
  std::mt19937_64 rng(77);
  for (int rep = 0; rep < 60; ++rep) {
    const auto g = oracle::random_skeleton(3 + rep % 9, 0.35, rng);
    const auto brute = oracle::brute_force_betweenness(g);
    for (const auto& s : edge_betweenness(g)) {
      ASSERT_NEAR(s.value, brute.at({s.edge.u, s.edge.v}), 1e-9);
    }
  }
}

TEST(EdgeBetweenness, PathGraphClosedForm) {
  // edge {i, i+1} separates i+1 vertices from p-1-i vertices
  const int p = 8;
  for (const auto& s : edge_betweenness(path(p))) {
    EXPECT_DOUBLE_EQ(s.value, (s.edge.u + 1.0) * (p - 1.0 - s.edge.u));
  }
}

TEST(GirvanNewman, AlreadySatisfiedPartitionUnchanged) {
  const auto g = from_edges(6, {{0, 1}, {1, 2}, {0, 2}, {3, 4}, {4, 5}, {3, 5}});
  GirvanNewmanTrace trace;
  const auto part = girvan_newman(g, max_size(3), &trace);
  EXPECT_TRUE(trace.removed.empty());
  EXPECT_EQ(part.blocks, (std::vector<std::vector<int>>{{0, 1, 2}, {3, 4, 5}}));
}

TEST(GirvanNewman, BarbellBridgeRemovedFirst) {
  const auto g = barbell();
  // the bridge carries all 16 cross pairs; every other edge carries strictly less
  const auto brute = oracle::brute_force_betweenness(g);
  for (const auto& [e, v] : brute) {
    if (e != std::pair{3, 4}) {
      EXPECT_LT(v, brute.at({3, 4}));
    }
  }
  EXPECT_DOUBLE_EQ(brute.at({3, 4}), 16.0);

  GirvanNewmanTrace trace;
  const auto part = girvan_newman(g, max_size(4), &trace);
  ASSERT_FALSE(trace.removed.empty());
  EXPECT_EQ(trace.removed.front(), (Edge{3, 4}));
  EXPECT_EQ(part.blocks, (std::vector<std::vector<int>>{{0, 1, 2, 3}, {4, 5, 6, 7}}));
}

TEST(GirvanNewman, PathSplitsAtCenter) {
  GirvanNewmanTrace trace;
  const auto part = girvan_newman(path(8), max_size(4), &trace);
  ASSERT_EQ(trace.removed.size(), 1u);
  EXPECT_EQ(trace.removed.front(), (Edge{3, 4}));
  EXPECT_EQ(part.blocks, (std::vector<std::vector<int>>{{0, 1, 2, 3}, {4, 5, 6, 7}}));
}

TEST(GirvanNewman, MinBlocksCriterion) {
  PartitionConfig cfg;
  cfg.max_block_size = 8;
  cfg.min_blocks = 3;
  const auto part = girvan_newman(path(8), cfg);
  EXPECT_EQ(part.size(), 3u);
}

TEST(GirvanNewman, RejectsBadConfig) {
  EXPECT_THROW(girvan_newman(path(4), max_size(1)), Error);
  PartitionConfig cfg;
  cfg.min_blocks = 0;
  EXPECT_THROW(girvan_newman(path(4), cfg), Error);
}

TEST(GirvanNewman, DefaultMaxBlockSize) {
  EXPECT_EQ(PartitionConfig{}.resolved_max_block_size(10), 8);
  EXPECT_EQ(PartitionConfig{}.resolved_max_block_size(20), 10);
  EXPECT_EQ(PartitionConfig{}.resolved_max_block_size(41), 21);
}

TEST(GirvanNewman, TreeInvariantsAndDeterminism) {
  std::mt19937_64 rng(5);
  for (int rep = 0; rep < 200; ++rep) {
    const int p = 2 + static_cast<int>(rng() % 29);
    const auto tree = oracle::random_tree(p, rng);
    const int k = 2 + static_cast<int>(rng() % p);
    GirvanNewmanTrace trace;
    const auto part = girvan_newman(tree, max_size(k), &trace);
    EXPECT_EQ(part.size(), trace.removed.size() + 1);
    EXPECT_TRUE(part == girvan_newman(tree, max_size(k)));
    std::vector<int> seen(p, 0);
    for (const auto& b : part.blocks) {
      EXPECT_FALSE(b.empty());
      EXPECT_LE(static_cast<int>(b.size()), k);
      EXPECT_TRUE(std::is_sorted(b.begin(), b.end()));
      for (int v : b) ++seen[v];
    }
    for (int c : seen) EXPECT_EQ(c, 1);
  }
}

TEST(CausalExpansion, SingleBlockUnchanged) {
  const auto g = path(5);
  Partition part{{{0, 1, 2, 3, 4}}};
  EXPECT_TRUE(causal_expansion(g, part) == part);
}

TEST(CausalExpansion, PathNeighborhoods) {
  const auto g = path(4);
  const auto out = causal_expansion(g, Partition{{{0, 1}, {2, 3}}});
  EXPECT_EQ(out.blocks, (std::vector<std::vector<int>>{{0, 1, 2}, {1, 2, 3}}));
}

TEST(CausalExpansion, DepthTwoReachesTwoHops) {
  const auto g = path(6);
  const auto out = causal_expansion(g, Partition{{{0}}}, 2);
  EXPECT_EQ(out.blocks, (std::vector<std::vector<int>>{{0, 1, 2}}));
}

TEST(CausalExpansion, OutOfRangeVertex) {
  EXPECT_THROW(causal_expansion(path(3), Partition{{{0, 7}}}), Error);
}

TEST(CausalExpansion, CoversEveryScaffoldEdgeOnRandomTrees) {
  std::mt19937_64 rng(11);
  for (int rep = 0; rep < 1000; ++rep) {
    const int p = 2 + static_cast<int>(rng() % 29);
    const auto tree = oracle::random_tree(p, rng);
    const auto core = girvan_newman(tree, max_size(2 + static_cast<int>(rng() % p)));
    const auto expanded = causal_expansion(tree, core);
    std::vector<char> covered(p, 0);
    for (const auto& b : expanded.blocks)
      for (int v : b) covered[v] = 1;
    for (char c : covered) ASSERT_TRUE(c);
    for (const auto& e : tree.edges()) ASSERT_TRUE(pair_covered(expanded, e.u, e.v));
    ASSERT_EQ(count_cross_block_edges(tree, expanded), 0u);
  }
}

TEST(InduceSubgraph, WholeVertexSetIsIdentity) {
  const auto g = barbell();
  const auto sub = induce_subgraph(g, {0, 1, 2, 3, 4, 5, 6, 7});
  EXPECT_TRUE(sub.local == g);
  EXPECT_TRUE(sub.to_global(8) == g);
}

TEST(InduceSubgraph, TriangleToSingleEdge) {
  const auto g = from_edges(3, {{0, 1}, {1, 2}, {0, 2}});
  const auto sub = induce_subgraph(g, {0, 1});
  EXPECT_EQ(sub.local.edges(), (std::vector<Edge>{{0, 1}}));
}

TEST(InduceSubgraph, MatchesDefinitionalFilter) {
  std::mt19937_64 rng(21);
  for (int rep = 0; rep < 100; ++rep) {
    const int p = 2 + static_cast<int>(rng() % 15);
    const auto g = oracle::random_skeleton(p, 0.4, rng);
    std::vector<int> block;
    for (int v = 0; v < p; ++v)
      if (rng() % 2) block.push_back(v);
    const auto sub = induce_subgraph(g, block);
    std::set<std::pair<int, int>> expected;
    for (auto [a, b] : oracle::edge_set(g)) {
      const bool ina = std::find(block.begin(), block.end(), a) != block.end();
      const bool inb = std::find(block.begin(), block.end(), b) != block.end();
      if (ina && inb) expected.insert({a, b});
    }
    EXPECT_EQ(oracle::edge_set(sub.to_global(p)), expected);
    EXPECT_EQ(sub.vertices, block);
  }
  EXPECT_THROW(induce_subgraph(path(3), {0, 5}), Error);
}
