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

#include "oracles/shap_oracle.hpp"
#include "tfmn/rng.hpp"
#include "tfmn/shap.hpp"

namespace tfmn {
namespace {

struct Data {
  Matrix x;
  std::vector<double> y;
};

Data make_data(std::size_t n, std::size_t m, std::uint64_t seed) {
  Rng rng(seed);
  Data d{Matrix(n, m), std::vector<double>(n)};
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < m; ++c) d.x(r, c) = rng.uniform01();
    d.y[r] = std::sin(4 * d.x(r, 0)) + d.x(r, 1 % m) * d.x(r, 2 % m) + 0.2 * rng.uniform01();
  }
  return d;
}

std::vector<double> phi_of(const RegressionTree& t, std::span<const double> x) {
  std::vector<double> phi(x.size(), 0.0);
  tree_shap(t, x, phi);
  return phi;
}

TEST(TreeShapTest, SingleLeafHasNoAttribution) {
  RegressionTree t;
  t.nodes.push_back(TreeNode{-1, 0, -1, -1, 3.0, 10, 0});
  const std::vector<double> x{0.2, 0.8};
  EXPECT_EQ(phi_of(t, x), (std::vector<double>{0.0, 0.0}));
  EXPECT_EQ(t.expected_value(), 3.0);
}

TEST(TreeShapTest, StumpHandValues) {
  // x0 <= 0.5 -> 1 (cover 3), else 5 (cover 1). E = 2.
  RegressionTree t;
  t.nodes = {TreeNode{0, 0.5, 1, 2, 2.0, 4, 0}, TreeNode{-1, 0, -1, -1, 1.0, 3, 1},
             TreeNode{-1, 0, -1, -1, 5.0, 1, 1}};
  EXPECT_DOUBLE_EQ(t.expected_value(), 2.0);
  const std::vector<double> lo{0.1, 9.0};
  const std::vector<double> hi{0.9, -9.0};
  EXPECT_EQ(phi_of(t, lo), (std::vector<double>{-1.0, 0.0}));
  EXPECT_EQ(phi_of(t, hi), (std::vector<double>{3.0, 0.0}));
}

TEST(TreeShapTest, SymmetricFeaturesShareCredit) {
  // y = 1 iff x0 > 0.5 and x1 > 0.5, on a balanced 2x2 design.
  Matrix x(4, 2);
  std::vector<double> y(4);
  for (std::size_t i = 0; i < 4; ++i) {
    x(i, 0) = static_cast<double>(i & 1);
    x(i, 1) = static_cast<double>((i >> 1) & 1);
    y[i] = x(i, 0) * x(i, 1);
  }
  const auto t = fit_tree(x, y, TreeParams{});
  const std::vector<double> both{1, 1};
  const auto phi = phi_of(t, both);
  EXPECT_NEAR(phi[0], phi[1], 1e-12);
  EXPECT_NEAR(phi[0] + phi[1] + t.expected_value(), 1.0, 1e-12);
}

TEST(TreeShapTest, MatchesCoalitionOracleOnRandomTrees) {
  Rng rng(11);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t m = 1 + rng.uniform_index(6);
    const auto d = make_data(30 + rng.uniform_index(60), m, 100 + static_cast<std::uint64_t>(trial));
    TreeParams p;
    p.max_depth = trial % 4 == 0 ? -1 : 1 + static_cast<int>(rng.uniform_index(6));
    std::vector<double> w(d.y.size());
    for (auto& v : w) v = static_cast<double>(rng.uniform_index(3));
    w[0] = 1;
    const auto t = fit_tree(d.x, d.y, w, p, static_cast<std::uint64_t>(trial));
    for (std::size_t r = 0; r < 10; ++r) {
      std::vector<double> probe(m);
      for (auto& v : probe) v = rng.uniform01();
      const auto fast = phi_of(t, probe);
      const auto slow = oracle::tree_shapley(t, probe);
      for (std::size_t f = 0; f < m; ++f) EXPECT_NEAR(fast[f], slow[f], 1e-9) << trial;
    }
  }
}

TEST(ShapMatrixTest, EnsemblesMatchOracleAndAreLocallyAccurate) {
  const auto d = make_data(60, 5, 3);
  EnsembleConfig gbm;
  gbm.kind = ModelKind::kGbm;
  gbm.n_estimators = 20;
  gbm.max_depth = 4;
  gbm.learning_rate = 0.3;
  gbm.subsample = 0.75;
  EnsembleConfig rfr;
  rfr.kind = ModelKind::kRfr;
  rfr.n_estimators = 15;
  rfr.max_features = MaxFeatures::kSqrt;
  auto gbm_abs = gbm;
  gbm_abs.loss = Loss::kAbsoluteError;
  for (const auto& cfg : {gbm, rfr, gbm_abs}) {
    const auto m = fit_ensemble(d.x, d.y, cfg);
    const auto s = tree_shap(m, d.x);
    EXPECT_LT(s.max_local_accuracy_error(), 1e-9);
    EXPECT_NEAR(s.base_value, oracle::ensemble_value(m, d.x.row(0), 0), 1e-12);
    for (std::size_t r = 0; r < 60; r += 7) {
      const auto slow = oracle::ensemble_shapley(m, d.x.row(r));
      for (std::size_t c = 0; c < 5; ++c) {
        EXPECT_NEAR(s.values(r, c), slow[s.model_column[c]], 1e-9);
      }
    }
    for (std::size_t c = 1; c < 5; ++c) EXPECT_GE(s.mean_abs(c - 1), s.mean_abs(c));
  }
}

TEST(ShapMatrixTest, UnusedFeatureGetsZero) {
  auto d = make_data(50, 3, 4);
  EnsembleConfig cfg;
  cfg.kind = ModelKind::kGbm;
  cfg.n_estimators = 10;
  cfg.max_depth = 3;
  // Column 2 is constant, so no tree can split on it.
  for (std::size_t r = 0; r < 50; ++r) d.x(r, 2) = 0.25;
  const auto m = fit_ensemble(d.x, d.y, cfg, {"a", "b", "dummy"});
  const auto s = tree_shap(m, d.x);
  const auto c = s.column_of("dummy");
  EXPECT_EQ(c, 2u);
  for (std::size_t r = 0; r < 50; ++r) EXPECT_EQ(s.values(r, c), 0.0);
  EXPECT_THROW(s.column_of("nope"), Error);
  EXPECT_THROW(tree_shap(m, Matrix(2, 2)), Error);
}

TEST(FeatureCodeTest, Codes) {
  EXPECT_EQ(feature_code("modularity"), "1");
  EXPECT_EQ(feature_code("max_betweenness"), "7");
  EXPECT_EQ(feature_code("anger"), "G");
  EXPECT_EQ(feature_code("surprise"), "U");
  EXPECT_EQ(feature_code("n_nodes"), "n_nodes");
}

TEST(PlotTest, ExportsAreConsistent) {
  const auto d = make_data(12, 3, 5);
  EnsembleConfig cfg;
  cfg.kind = ModelKind::kRfr;
  cfg.n_estimators = 5;
  const auto m = fit_ensemble(d.x, d.y, cfg, {"modularity", "joy", "age"});
  const auto s = tree_shap(m, d.x);
  Matrix scaled(12, 3, 0.0);
  std::vector<std::string> ids;
  for (std::size_t r = 0; r < 12; ++r) ids.push_back("s" + std::to_string(r));
  const auto b = export_plots(s, scaled, ids);
  const auto bee = csv::parse(b.beeswarm_csv);
  EXPECT_EQ(bee.rows.size(), 36u);
  const auto bar = csv::parse(b.bar_csv);
  ASSERT_EQ(bar.rows.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(bar.rows[i][0], s.feature_names[i]);
  const auto heat = csv::parse(b.heatmap_csv);
  ASSERT_EQ(heat.rows.size(), 12u);
  for (std::size_t i = 1; i < 12; ++i) {
    EXPECT_LE(*text::parse_double(heat.rows[i - 1][1]), *text::parse_double(heat.rows[i][1]));
  }
  EXPECT_EQ(b.summary["samples"], 12);
  EXPECT_THROW(export_plots(s, Matrix(3, 3)), Error);
}

TEST(EliminationTest, KeepsSignalAndDropsNoise) {
  Rng rng(6);
  const std::size_t n = 120;
  Matrix x(n, 5);
  std::vector<double> y(n);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < 5; ++c) x(r, c) = rng.uniform01();
    y[r] = 3 * x(r, 0) + 2 * x(r, 1) + 0.1 * rng.uniform01();
  }
  EnsembleConfig cfg;
  cfg.kind = ModelKind::kGbm;
  cfg.n_estimators = 50;
  cfg.max_depth = 3;
  cfg.learning_rate = 0.2;
  const auto res = shap_feature_elimination(x, y, {cfg}, 4, 7, {"s0", "s1", "n0", "n1", "n2"});
  EXPECT_EQ(res.kept, (std::vector<std::string>{"s0", "s1"}));
  EXPECT_EQ(res.trace.size(), 5u);
  EXPECT_GT(res.final_report.pearson_r, 0.9);
  const auto j = to_json(res);
  EXPECT_EQ(j["trace"].size(), 5u);
  EXPECT_EQ(to_json(shap_feature_elimination(x, y, {cfg}, 4, 7, {"s0", "s1", "n0", "n1", "n2"})), j);
}

TEST(EliminationTest, LastFeatureSurvives) {
  Rng rng(7);
  Matrix x(40, 3);
  std::vector<double> y(40);
  for (std::size_t r = 0; r < 40; ++r) {
    for (std::size_t c = 0; c < 3; ++c) x(r, c) = rng.uniform01();
    y[r] = rng.uniform01();
  }
  EnsembleConfig cfg;
  cfg.kind = ModelKind::kRfr;
  cfg.n_estimators = 10;
  cfg.max_depth = 2;
  const auto res = shap_feature_elimination(x, y, {cfg}, 4, 1, {}, 10.0, 3);
  EXPECT_EQ(res.kept.size(), 1u);
  EXPECT_EQ(res.trace.back().note, "last remaining feature");
  for (std::size_t i = 0; i + 1 < res.trace.size(); ++i) EXPECT_EQ(res.trace[i].r_shuffled.size(), 3u);
}

}  // namespace
}  // namespace tfmn
