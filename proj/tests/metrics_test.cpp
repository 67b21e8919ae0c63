/*
 * Copyright 2026 The TFMN Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <gtest/gtest.h>

#include <chrono>
#include <cmath>
#include <map>
#include <string>

#include "oracles/graph_oracle.hpp"
#include "test_util.hpp"
#include "tfmn/metrics.hpp"

namespace tfmn::metrics {
namespace {

using testing::graph_from_edges;

Graph complete(std::size_t n) {
  Graph g(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) g.add_edge(static_cast<int>(i), static_cast<int>(j));
  return g;
}

const Graph kPath3 = graph_from_edges(3, {{0, 1}, {1, 2}});
const Graph kStar3 = graph_from_edges(4, {{0, 1}, {0, 2}, {0, 3}});
const Graph kTriangle = complete(3);
const Graph kBridgedTriangles =
    graph_from_edges(6, {{0, 1}, {1, 2}, {0, 2}, {3, 4}, {4, 5}, {3, 5}, {2, 3}});

TEST(ClusteringTest, HandCases) {
  EXPECT_EQ(mean_clustering(kTriangle), 1.0);
  EXPECT_EQ(mean_clustering(kPath3), 0.0);
  EXPECT_THROW(mean_clustering(Graph(0)), Error);
}

TEST(PathStatsTest, HandCases) {
  const auto p = shortest_path_stats(kPath3);
  EXPECT_DOUBLE_EQ(p.mean_shortest_path, 4.0 / 3.0);
  EXPECT_EQ(p.diameter, 2);
  const auto k5 = shortest_path_stats(complete(5));
  EXPECT_EQ(k5.mean_shortest_path, 1.0);
  EXPECT_EQ(k5.diameter, 1);
  const auto tri_iso = shortest_path_stats(graph_from_edges(4, {{0, 1}, {1, 2}, {0, 2}}));
  EXPECT_EQ(tri_iso.mean_shortest_path, 1.0);
  EXPECT_EQ(tri_iso.diameter, 1);
  EXPECT_THROW(shortest_path_stats(Graph(3)), Error);
}

TEST(ClosenessTest, HandCases) {
  EXPECT_EQ(closeness_values(kStar3)[0], 1.0);
  const auto c = closeness_values(kPath3);
  EXPECT_DOUBLE_EQ(c[1], 1.0);
  EXPECT_DOUBLE_EQ(c[0], 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(closeness_stats(kPath3).mean, 7.0 / 9.0);
  for (double v : closeness_values(graph_from_edges(4, {{0, 1}, {2, 3}}))) EXPECT_DOUBLE_EQ(v, 1.0 / 3.0);
  EXPECT_EQ(closeness_values(graph_from_edges(3, {{0, 1}}))[2], 0.0);
}

TEST(BetweennessTest, HandCases) {
  EXPECT_EQ(betweenness_values(kStar3)[0], 3.0);
  for (double v : betweenness_values(complete(4))) EXPECT_EQ(v, 0.0);
  // Square: each node sits on one of the two shortest paths of the opposite pair.
  for (double v : betweenness_values(graph_from_edges(4, {{0, 1}, {1, 2}, {2, 3}, {3, 0}}))) {
    EXPECT_DOUBLE_EQ(v, 0.5);
  }
  EXPECT_DOUBLE_EQ(betweenness_values(kStar3, true)[0], 1.0);
}

TEST(ModularityTest, BridgedTriangles) {
  EXPECT_NEAR(modularity(kBridgedTriangles, {0, 0, 0, 1, 1, 1}), 5.0 / 14.0, 1e-12);
  EXPECT_EQ(modularity(kBridgedTriangles, Partition(6, 0)), 0.0);
  EXPECT_NEAR(modularity(kBridgedTriangles, detect_communities(kBridgedTriangles)), 5.0 / 14.0, 1e-12);
  EXPECT_NEAR(
      modularity(kBridgedTriangles, detect_communities(kBridgedTriangles, CommunityMethod::kLouvain, 9)),
      5.0 / 14.0, 1e-12);
}

TEST(ModularityTest, Errors) {
  EXPECT_THROW(modularity(Graph(3), {0, 0, 0}), Error);
  EXPECT_THROW(modularity(kPath3, {0, 0}), Error);
  EXPECT_THROW(modularity(kPath3, {0, -1, 0}), Error);
  try {
    modularity(kPath3, {0, 0});
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kInvalidPartition);
  }
}

TEST(ModularityTest, SingleCommunityIsExactlyZeroOnRandomGraphs) {
  Rng rng(17);
  for (int t = 0; t < 100; ++t) {
    const auto g = testing::random_graph(2 + rng.uniform_index(11), 0.4, rng);
    if (g.num_edges() == 0) continue;
    EXPECT_EQ(modularity(g, Partition(g.num_nodes(), 3)), 0.0);
  }
}

TEST(ModularityTest, DetectionIsDeterministicAndNonNegative) {
  Rng rng(19);
  for (int t = 0; t < 100; ++t) {
    const auto g = testing::random_graph(3 + rng.uniform_index(10), 0.35, rng);
    if (g.num_edges() == 0) continue;
    for (auto method : {CommunityMethod::kGreedy, CommunityMethod::kLouvain}) {
      const auto p = detect_communities(g, method, 5);
      EXPECT_EQ(p, detect_communities(g, method, 5));
      EXPECT_GE(modularity(g, p), 0.0);
    }
  }
}

TEST(EfficiencyTest, HandCases) {
  EXPECT_DOUBLE_EQ(efficiencies(complete(5)).global, 1.0);
  EXPECT_DOUBLE_EQ(efficiencies(kPath3).global, 5.0 / 6.0);
  EXPECT_DOUBLE_EQ(efficiencies(kTriangle).local, 1.0);
  EXPECT_EQ(efficiencies(kPath3).local, 0.0);
}

TEST(CoreTest, HandCases) {
  const auto pendant = core_decomposition(graph_from_edges(4, {{0, 1}, {1, 2}, {0, 2}, {2, 3}}));
  EXPECT_EQ(pendant.core_number, 2);
  EXPECT_EQ(pendant.core_size, 3u);
  EXPECT_EQ(core_decomposition(graph_from_edges(5, {{0, 1}, {1, 2}, {1, 3}, {3, 4}})).core_number, 1);
  const auto k5 = core_decomposition(complete(5));
  EXPECT_EQ(k5.core_number, 4);
  EXPECT_EQ(k5.core_size, 5u);
}

TEST(AssortativityCliqueTest, HandCases) {
  EXPECT_DOUBLE_EQ(assortativity(kStar3).value, -1.0);
  EXPECT_TRUE(assortativity(complete(4)).degenerate);
  EXPECT_EQ(assortativity(complete(4)).value, 0.0);
  EXPECT_EQ(max_clique(complete(4)), 4u);
  EXPECT_EQ(basic_counts(complete(4)).density, 1.0);
  EXPECT_EQ(max_clique(Graph(3)), 1u);
}

TEST(BasicCountsTest, DisconnectedGraph) {
  const auto c = basic_counts(graph_from_edges(6, {{0, 1}, {1, 2}, {3, 4}}));
  EXPECT_EQ(c.n_components, 3u);
  EXPECT_EQ(c.largest_component_size, 3u);
  EXPECT_DOUBLE_EQ(c.largest_component_ratio, 0.5);
  EXPECT_EQ(c.max_degree, 2);
  EXPECT_DOUBLE_EQ(c.mean_degree, 1.0);
  EXPECT_DOUBLE_EQ(c.density, 0.2);
}

void expect_vectors_near(const MetricVector& got, const MetricVector& want, double tol) {
  const auto g = got.values();
  const auto w = want.values();
  for (std::size_t i = 0; i < kNumMetrics; ++i) {
    EXPECT_NEAR(g[i], w[i], tol) << kMetricColumns[i];
  }
  EXPECT_EQ(got.assortativity_degenerate, want.assortativity_degenerate);
  EXPECT_EQ(got.path_stats_degenerate, want.path_stats_degenerate);
}

TEST(OracleTest, RandomGraphsMatchBruteForce) {
  Rng rng(2024);
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = 1 + rng.uniform_index(12);
    const auto g = testing::random_graph(n, 0.1 + 0.6 * rng.uniform01(), rng);
    const auto got = compute_metrics(g);
    const auto partition =
        g.num_edges() ? detect_communities(g) : Partition(g.num_nodes(), 0);
    expect_vectors_near(got, oracle::metric_vector(g, partition), 1e-9);
  }
}

TEST(OracleTest, BetweennessAndCliqueOnDenserGraphs) {
  Rng rng(99);
  for (int t = 0; t < 40; ++t) {
    const auto g = testing::random_graph(9 + rng.uniform_index(2), 0.5, rng);
    const auto a = oracle::adjacency_matrix(g);
    const auto want = oracle::betweenness(a);
    const auto got = betweenness_values(g);
    for (std::size_t i = 0; i < want.size(); ++i) EXPECT_NEAR(got[i], want[i], 1e-9);
    EXPECT_EQ(static_cast<int>(max_clique(g)), oracle::max_clique(a));
  }
}

// Modularity is left out: the greedy merge order breaks exact ties by node
// index, so relabelled graphs may settle on different equal-or-near-equal
// partitions.
TEST(PropertyTest, RelabellingLeavesMetricsUnchanged) {
  Rng rng(31);
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = 2 + rng.uniform_index(11);
    const auto g = testing::random_graph(n, 0.4, rng);
    const auto perm = random_permutation(n, rng.next());
    const auto a = compute_metrics(g).values();
    const auto b = compute_metrics(relabel(g, perm)).values();
    for (std::size_t i = 0; i < kNumMetrics; ++i) {
      if (kMetricColumns[i] == "modularity") continue;
      EXPECT_NEAR(a[i], b[i], 1e-9) << kMetricColumns[i];
    }
  }
}

TEST(PropertyTest, AddingAnEdgeIsMonotone) {
  Rng rng(37);
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = 3 + rng.uniform_index(10);
    auto g = testing::random_graph(n, 0.3, rng);
    const auto before = compute_metrics(g);
    int u = 0;
    int v = 0;
    do {
      u = static_cast<int>(rng.uniform_index(n));
      v = static_cast<int>(rng.uniform_index(n));
    } while (u == v || g.adjacent(u, v));
    if (g.num_edges() == n * (n - 1) / 2) continue;
    g.add_edge(u, v);
    const auto after = compute_metrics(g);
    EXPECT_GE(after.density, before.density);
    EXPECT_GE(after.mean_degree, before.mean_degree);
    EXPECT_GE(after.global_efficiency, before.global_efficiency - 1e-12);
    EXPECT_GE(after.core_number, before.core_number);
    EXPECT_GE(after.max_clique_size, before.max_clique_size);
  }
}

TEST(PropertyTest, RangeInvariants) {
  Rng rng(41);
  for (int t = 0; t < 200; ++t) {
    const auto g = testing::random_graph(1 + rng.uniform_index(12), rng.uniform01(), rng);
    const auto m = compute_metrics(g);
    EXPECT_GE(m.density, 0.0);
    EXPECT_LE(m.density, 1.0);
    EXPECT_GE(m.mean_clustering, 0.0);
    EXPECT_LE(m.mean_clustering, 1.0);
    EXPECT_GE(m.global_efficiency, 0.0);
    EXPECT_LE(m.global_efficiency, 1.0 + 1e-12);
    EXPECT_LE(m.local_efficiency, 1.0 + 1e-12);
    EXPECT_GE(m.modularity, -1.0);
    EXPECT_LE(m.modularity, 1.0);
    EXPECT_DOUBLE_EQ(m.largest_component_ratio, m.largest_component_size / m.n_nodes);
    if (!m.path_stats_degenerate) {
      EXPECT_GE(m.diameter, m.mean_shortest_path);
    }
  }
}

TEST(ExportTest, CsvRoundTripIsExact) {
  Rng rng(43);
  std::map<std::string, MetricVector> rows;
  for (int t = 0; t < 12; ++t) {
    rows["t" + std::to_string(t)] = compute_metrics(testing::random_graph(1 + rng.uniform_index(15), 0.3, rng));
  }
  const std::string text = format_metrics_csv(rows);
  const auto back = parse_metrics_csv(text, "mem");
  ASSERT_EQ(back.size(), rows.size());
  for (const auto& [id, m] : rows) {
    const auto& b = back.at(id);
    EXPECT_EQ(b.values(), m.values()) << id;
    EXPECT_EQ(b.assortativity_degenerate, m.assortativity_degenerate);
    EXPECT_EQ(b.path_stats_degenerate, m.path_stats_degenerate);
  }
  EXPECT_EQ(format_metrics_csv(back), text);
}

TEST(ExportTest, MissingColumnIsSchemaMismatch) {
  try {
    parse_metrics_csv("transcript_id,n_nodes\nt1,3\n", "mem");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kSchemaMismatch);
  }
}

}  // namespace
}  // namespace tfmn::metrics
