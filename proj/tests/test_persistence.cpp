#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <set>

#include "oracles.hpp"
#include "topoalign/persistence.hpp"

using namespace topoalign;

namespace {

LabeledPointCloud line_cloud(const std::vector<double>& xs, const std::vector<std::uint8_t>& labels) {
  std::vector<Vec> rows;
  for (double x : xs) rows.push_back({x});
  return {Matrix::from_rows(rows), labels};
}

LabeledPointCloud random_cloud(Rng& rng, std::size_t n, std::size_t d) {
  std::vector<std::uint8_t> labels(n);
  for (auto& l : labels) l = static_cast<std::uint8_t>(rng.index(2));
  return {ref::random_matrix(rng, n, d), labels};
}

std::vector<std::pair<std::size_t, std::size_t>> edge_pairs(const std::vector<DeathEdge>& edges) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (const auto& e : edges) out.emplace_back(e.i, e.j);
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

TEST(UnionFind, MergesAndCounts) {
  UnionFind uf(5);
  EXPECT_EQ(uf.components(), 5u);
  EXPECT_TRUE(uf.unite(0, 1));
  EXPECT_TRUE(uf.unite(3, 4));
  EXPECT_FALSE(uf.unite(1, 0));
  EXPECT_EQ(uf.components(), 3u);
  EXPECT_TRUE(uf.unite(1, 4));
  EXPECT_EQ(uf.components(), 2u);
  EXPECT_TRUE(uf.connected(0, 3));
  EXPECT_FALSE(uf.connected(2, 3));
  const auto root = uf.find(4);
  EXPECT_EQ(uf.find(root), root);
  EXPECT_EQ(uf.find(4), root);
}

TEST(DeathEdges, TwoPoints) {
  const auto edges = death_edges(line_cloud({2.0, 5.5}, {0, 1}));
  ASSERT_EQ(edges.size(), 1u);
  EXPECT_EQ(edges[0], (DeathEdge{0, 1, 3.5}));
}

TEST(DeathEdges, SinglePointHasNone) { EXPECT_TRUE(death_edges(line_cloud({1.0}, {0})).empty()); }

TEST(DeathEdges, CollinearChain) {
  const auto edges = death_edges(line_cloud({0, 1, 3, 7, 15}, {0, 0, 0, 0, 0}));
  const std::vector<DeathEdge> expect{{0, 1, 1}, {1, 2, 2}, {2, 3, 4}, {3, 4, 8}};
  EXPECT_EQ(edges, expect);
}

TEST(DeathEdges, MatchesKruskalOracle) {
  Rng rng(42);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t n = 1 + rng.index(64);
    const auto cloud = random_cloud(rng, n, 1 + rng.index(16));
    const auto edges = death_edges(cloud);
    ASSERT_EQ(edges.size(), n - 1);
    EXPECT_EQ(edge_pairs(edges), ref::kruskal_mst_pairs(ref::rows_of(cloud.points())));
    for (std::size_t k = 1; k < edges.size(); ++k) EXPECT_LE(edges[k - 1].weight, edges[k].weight);
    for (const auto& e : edges) EXPECT_LT(e.i, e.j);
  }
}

TEST(DeathEdges, TieBreakIsLexicographic) {
  // Unit square: four edges of weight 1, the first three in (i, j) order win.
  const LabeledPointCloud sq{Matrix::from_rows({{0, 0}, {1, 0}, {0, 1}, {1, 1}}), {0, 0, 0, 0}};
  const auto edges = death_edges(sq);
  const std::vector<DeathEdge> expect{{0, 1, 1}, {0, 2, 1}, {1, 3, 1}};
  EXPECT_EQ(edges, expect);
}

TEST(DeathEdges, PermutationEquivariant) {
  Rng rng(77);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 2 + rng.index(30);
    const auto cloud = random_cloud(rng, n, 4);
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    for (std::size_t i = n - 1; i > 0; --i) std::swap(perm[i], perm[rng.index(i + 1)]);
    Matrix permuted(n, 4);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = 0; k < 4; ++k) permuted(perm[i], k) = cloud.points()(i, k);
    const auto original = death_edges(cloud);
    std::set<std::pair<std::size_t, std::size_t>> mapped;
    for (const auto& e : original) mapped.insert(std::minmax(perm[e.i], perm[e.j]));
    std::set<std::pair<std::size_t, std::size_t>> recomputed;
    for (const auto& e : death_edges(LabeledPointCloud(permuted, std::vector<std::uint8_t>(n, 0))))
      recomputed.insert({e.i, e.j});
    EXPECT_EQ(mapped, recomputed);
  }
}

TEST(DeathEdges, DuplicatePointAddsOneZeroEdge) {
  Rng rng(13);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 3 + rng.index(20);
    const auto cloud = random_cloud(rng, n, 3);
    const std::size_t dup = rng.index(n);
    std::vector<Vec> rows = ref::rows_of(cloud.points());
    rows.push_back(rows[dup]);
    const auto before = death_edges(cloud);
    const auto after = death_edges(LabeledPointCloud(Matrix::from_rows(rows), std::vector<std::uint8_t>(n + 1, 0)));
    ASSERT_EQ(after.size(), before.size() + 1);
    EXPECT_EQ(after.front(), (DeathEdge{dup, n, 0.0}));
    std::vector<double> wb, wa;
    for (const auto& e : before) wb.push_back(e.weight);
    for (std::size_t k = 1; k < after.size(); ++k) wa.push_back(after[k].weight);
    EXPECT_EQ(wa, wb);
  }
}

TEST(ExtractBridges, SingleLabelIsEmpty) {
  const auto cloud = line_cloud({0, 1, 5}, {1, 1, 1});
  EXPECT_TRUE(extract_bridges(cloud, death_edges(cloud)).empty());
}

TEST(ExtractBridges, TwoClusters) {
  const auto cloud = line_cloud({0, 1, 10, 11}, {0, 0, 1, 1});
  const auto bridges = extract_bridges(cloud, death_edges(cloud));
  ASSERT_EQ(bridges.size(), 1u);
  EXPECT_EQ(bridges[0].source, 1u);
  EXPECT_EQ(bridges[0].target, 2u);
  EXPECT_EQ(bridges[0].direction, (Vec{9}));
  EXPECT_EQ(bridges[0].weight, 9.0);
}

TEST(ExtractBridges, OrientsFromLabelZero) {
  // Label 1 on the lower index: the edge must be swapped.
  const auto cloud = line_cloud({0, 4}, {1, 0});
  const auto bridges = extract_bridges(cloud, death_edges(cloud));
  ASSERT_EQ(bridges.size(), 1u);
  EXPECT_EQ(bridges[0].source, 1u);
  EXPECT_EQ(bridges[0].target, 0u);
  EXPECT_EQ(bridges[0].direction, (Vec{-4}));
}

TEST(ExtractBridges, ContractsOnRandomClouds) {
  Rng rng(1);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + rng.index(40);
    auto cloud = random_cloud(rng, n, 1 + rng.index(8));
    if (!cloud.has_both_labels()) continue;
    const auto edges = death_edges(cloud);
    const auto bridges = extract_bridges(cloud, edges);
    ASSERT_FALSE(bridges.empty());
    for (std::size_t k = 0; k < bridges.size(); ++k) {
      const auto& b = bridges[k];
      EXPECT_EQ(cloud.labels()[b.source], 0);
      EXPECT_EQ(cloud.labels()[b.target], 1);
      EXPECT_EQ(b.direction, subtract(cloud.points().row(b.target), cloud.points().row(b.source)));
      if (k) {
        EXPECT_LE(bridges[k - 1].weight, b.weight);
      }
    }
  }
}

TEST(BaselinePairs, PerExample) {
  const auto cloud = line_cloud({0, 1, 5, 7}, {0, 0, 1, 1});
  const auto pairs = baseline_pairs(cloud, BaselineMode::PerExample, 0);
  ASSERT_EQ(pairs.size(), 2u);
  EXPECT_EQ(pairs[0].source, 0u);
  EXPECT_EQ(pairs[0].target, 2u);
  EXPECT_EQ(pairs[1].source, 1u);
  EXPECT_EQ(pairs[1].target, 3u);
}

TEST(BaselinePairs, NearestGold) {
  const auto cloud = line_cloud({0, 9, 1, 10}, {0, 0, 1, 1});
  const auto pairs = baseline_pairs(cloud, BaselineMode::Knn, 0);
  ASSERT_EQ(pairs.size(), 2u);
  EXPECT_EQ(pairs[0].target, 2u);
  EXPECT_EQ(pairs[0].weight, 1.0);
  EXPECT_EQ(pairs[1].target, 3u);
  EXPECT_EQ(pairs[1].weight, 1.0);
}

TEST(BaselinePairs, NearestGoldTiesGoLow) {
  const auto cloud = line_cloud({5, 6, 4, 6}, {0, 0, 1, 1});
  const auto pairs = baseline_pairs(cloud, BaselineMode::Knn, 0);
  EXPECT_EQ(pairs[0].target, 2u);  // |5-4| = |5-6|
}

TEST(BaselinePairs, RandomIsSeeded) {
  Rng rng(3);
  const LabeledPointCloud cloud{ref::random_matrix(rng, 20, 3), [] {
                                  std::vector<std::uint8_t> l(20, 0);
                                  std::fill(l.begin() + 10, l.end(), 1);
                                  return l;
                                }()};
  const auto a = baseline_pairs(cloud, BaselineMode::Random, 99);
  EXPECT_EQ(a, baseline_pairs(cloud, BaselineMode::Random, 99));
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].source, i);
    EXPECT_GE(a[i].target, 10u);
  }
  EXPECT_NE(a, baseline_pairs(cloud, BaselineMode::Random, 100));
}

TEST(BaselinePairs, LayoutError) {
  const auto cloud = line_cloud({0, 1, 2}, {0, 1, 1});
  try {
    baseline_pairs(cloud, BaselineMode::PerExample, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::LayoutError);
  }
  EXPECT_THROW(baseline_pairs(line_cloud({0, 1}, {1, 0}), BaselineMode::Knn, 0), Error);
}

TEST(LabeledPointCloud, Validation) {
  EXPECT_THROW(LabeledPointCloud(Matrix(2, 1), {0, 2}), Error);
  EXPECT_THROW(LabeledPointCloud(Matrix(2, 1), {0}), Error);
  EXPECT_THROW(LabeledPointCloud(Matrix(2, 1), {0, 1}, {"a", "a"}), Error);
}
