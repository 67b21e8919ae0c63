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

#include <set>

#include "tfmn/cv.hpp"
#include "tfmn/rng.hpp"

namespace tfmn {
namespace {

struct Data {
  Matrix x;
  std::vector<double> y;
};

Data make_data(std::size_t n, std::size_t m, double noise, std::uint64_t seed) {
  Rng rng(seed);
  Data d{Matrix(n, m), std::vector<double>(n)};
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < m; ++c) d.x(r, c) = rng.uniform01();
    d.y[r] = 3 * d.x(r, 0) + d.x(r, 1) * d.x(r, 1) + noise * rng.uniform01();
  }
  return d;
}

// Naive cross-validation: a separate fit for every config and fold.
std::vector<std::vector<double>> naive_oof(const Matrix& x, const std::vector<double>& y,
                                           const std::vector<EnsembleConfig>& grid,
                                           const std::vector<int>& folds) {
  std::vector<std::vector<double>> out(grid.size(), std::vector<double>(y.size()));
  const int k = *std::max_element(folds.begin(), folds.end()) + 1;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    for (int f = 0; f < k; ++f) {
      std::vector<std::size_t> train, test;
      for (std::size_t i = 0; i < y.size(); ++i) (folds[i] == f ? test : train).push_back(i);
      std::vector<double> yt;
      for (auto i : train) yt.push_back(y[i]);
      const auto m = fit_ensemble(x.select_rows(train), yt, grid[g]);
      for (auto i : test) out[g][i] = m.predict(x.row(i));
    }
  }
  return out;
}

TEST(GridTest, SizesAndOrder) {
  const auto g = GbmGrid{}.expand(5);
  ASSERT_EQ(g.size(), 3780u);
  EXPECT_EQ(g[0].n_estimators, 5);
  EXPECT_EQ(g[1].loss, Loss::kAbsoluteError);
  EXPECT_EQ(g.back().n_estimators, 150);
  EXPECT_EQ(g.back().max_depth, -1);
  std::set<std::string> distinct;
  for (const auto& c : g) {
    EXPECT_EQ(c.seed, 5u);
    distinct.insert(describe(c));
  }
  EXPECT_EQ(distinct.size(), 3780u);
  const auto r = RfrGrid{}.expand(5);
  ASSERT_EQ(r.size(), 756u);
  for (const auto& c : r) EXPECT_EQ(c.kind, ModelKind::kRfr);
}

TEST(FoldTest, BalancedDeterministicAndSeeded) {
  for (std::size_t n : {8u, 9u, 10u, 11u, 232u}) {
    const auto f = make_folds(n, 4, 17);
    std::vector<std::size_t> sizes(4, 0);
    for (int v : f) ++sizes[static_cast<std::size_t>(v)];
    for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(sizes[i], n / 4 + (i < n % 4 ? 1 : 0));
    EXPECT_EQ(make_folds(n, 4, 17), f);
  }
  EXPECT_NE(make_folds(232, 4, 17), make_folds(232, 4, 18));
  EXPECT_THROW(make_folds(7, 4, 0), Error);
  EXPECT_THROW(make_folds(10, 1, 0), Error);
}

TEST(CvTest, SharedPrefixFitsEqualSeparateFits) {
  const auto d = make_data(40, 4, 0.2, 1);
  GbmGrid gg;
  gg.n_estimators = {7, 2, 4};
  gg.learning_rate = {0.3};
  gg.max_depth = {2, -1};
  gg.max_features = {MaxFeatures::kSqrt, MaxFeatures::kAll};
  gg.subsample = {0.75};
  RfrGrid rg;
  rg.n_estimators = {6, 3};
  rg.max_depth = {3};
  rg.max_features = {MaxFeatures::kLog2};
  rg.max_leaf_nodes = {5, -1};
  rg.criterion = {Criterion::kSquaredError};
  auto grid = gg.expand(9);
  const auto rfr = rg.expand(9);
  grid.insert(grid.end(), rfr.begin(), rfr.end());
  const auto folds = make_folds(40, 4, 3);
  const auto fast = out_of_fold_predictions(d.x, d.y, grid, folds);
  const auto slow = naive_oof(d.x, d.y, grid, folds);
  ASSERT_EQ(fast.size(), grid.size());
  for (std::size_t g = 0; g < grid.size(); ++g) EXPECT_EQ(fast[g], slow[g]) << describe(grid[g]);
}

TEST(CvTest, PooledPredictionsCoverEveryRowOnce) {
  const auto d = make_data(41, 3, 0.1, 2);
  RfrGrid rg;
  rg.n_estimators = {10};
  rg.max_depth = {3};
  rg.max_features = {MaxFeatures::kAll};
  rg.max_leaf_nodes = {-1};
  rg.criterion = {Criterion::kSquaredError};
  const auto rep = cross_validate(d.x, d.y, rg.expand(0), 4, 11);
  EXPECT_EQ(rep.predictions.size(), 41u);
  EXPECT_EQ(rep.fold_of_row.size(), 41u);
  EXPECT_EQ(rep.folds(), 4u);
  EXPECT_EQ(rep.y, d.y);
  const auto c = stats::pearson(d.y, rep.predictions);
  EXPECT_DOUBLE_EQ(c.r, rep.pearson_r);
  EXPECT_DOUBLE_EQ(stats::mean_absolute_error(d.y, rep.predictions), rep.mae);
  EXPECT_DOUBLE_EQ(stats::pearson_p_value(c.r, 41), rep.p_value);
  const auto pred = csv::parse(format_predictions_csv(rep));
  EXPECT_EQ(pred.rows.size(), 41u);
  const auto j = to_json(rep);
  EXPECT_EQ(j["per_fold"].size(), 4u);
}

TEST(CvTest, TargetEqualToPredictorIsRecovered) {
  Rng rng(3);
  Matrix x(80, 2);
  std::vector<double> y(80);
  for (std::size_t i = 0; i < 80; ++i) {
    x(i, 0) = rng.uniform01();
    x(i, 1) = rng.uniform01();
    y[i] = x(i, 0);
  }
  GbmGrid gg;
  gg.n_estimators = {100};
  gg.learning_rate = {0.3};
  gg.max_depth = {3};
  gg.max_features = {MaxFeatures::kAll};
  gg.subsample = {1.0};
  gg.loss = {Loss::kSquaredError};
  const auto rep = cross_validate(x, y, gg.expand(0), 4, 0);
  EXPECT_GT(rep.pearson_r, 0.98);
  EXPECT_TRUE(rep.significant);
}

TEST(CvTest, IdentityPermutationReproducesBaseline) {
  const auto d = make_data(32, 3, 0.5, 4);
  RfrGrid rg;
  rg.n_estimators = {5, 10};
  rg.max_depth = {2, 3};
  rg.max_features = {MaxFeatures::kAll};
  rg.max_leaf_nodes = {-1};
  rg.criterion = {Criterion::kSquaredError};
  const auto grid = rg.expand(1);
  const auto base = cross_validate(d.x, d.y, grid, 4, 8);
  const auto same = permutation_baseline(d.x, d.y, grid, 4, 8, 2, true);
  for (const auto& rep : same) {
    EXPECT_EQ(rep.predictions, base.predictions);
    EXPECT_EQ(rep.pearson_r, base.pearson_r);
  }
  const auto shuffled = permutation_baseline(d.x, d.y, grid, 4, 8, 3);
  ASSERT_EQ(shuffled.size(), 3u);
  EXPECT_NE(shuffled[0].y, d.y);
  auto sorted = shuffled[1].y;
  auto orig = d.y;
  std::sort(sorted.begin(), sorted.end());
  std::sort(orig.begin(), orig.end());
  EXPECT_EQ(sorted, orig);
  EXPECT_NE(shuffled[0].y, shuffled[1].y);
}

TEST(SelectTest, RuleOrder) {
  auto mk = [](std::size_t i, double r, double p, double mae, bool deg = false) {
    ConfigScore s;
    s.grid_index = i;
    s.r = r;
    s.p_value = p;
    s.mae = mae;
    s.degenerate = deg;
    return s;
  };
  bool sig = false;
  EXPECT_EQ(select_config({mk(0, 0.3, 0.01, 1), mk(1, -0.5, 0.001, 2), mk(2, 0.4, 0.02, 1)}, &sig), 1u);
  EXPECT_TRUE(sig);
  EXPECT_EQ(select_config({mk(0, 0.5, 0.01, 2), mk(1, 0.5, 0.01, 1)}), 1u);
  EXPECT_EQ(select_config({mk(0, 0.5, 0.01, 1), mk(1, 0.5, 0.01, 1)}), 0u);
  EXPECT_EQ(select_config({mk(0, 0.9, 0.2, 1), mk(1, 0.2, 0.04, 1)}, &sig), 1u);
  EXPECT_TRUE(sig);
  EXPECT_EQ(select_config({mk(0, 0.1, 0.6, 1), mk(1, 0.2, 0.4, 1)}, &sig), 1u);
  EXPECT_FALSE(sig);
  EXPECT_EQ(select_config({mk(0, 0.0, 1.0, 1, true), mk(1, 0.1, 0.9, 1)}, &sig), 1u);
  EXPECT_THROW(select_config({}), Error);
}

TEST(CvTest, PermutedTargetsLoseSignal) {
  const auto d = make_data(120, 3, 0.1, 5);
  RfrGrid rg;
  rg.n_estimators = {25};
  rg.max_depth = {5};
  rg.max_features = {MaxFeatures::kAll};
  rg.max_leaf_nodes = {-1};
  rg.criterion = {Criterion::kSquaredError};
  const auto grid = rg.expand(2);
  const auto base = cross_validate(d.x, d.y, grid, 4, 5);
  EXPECT_GT(base.pearson_r, 0.9);
  const auto perm = permutation_baseline(d.x, d.y, grid, 4, 5, 10);
  for (const auto& p : perm) EXPECT_LT(std::abs(p.pearson_r), 0.4);
}

}  // namespace
}  // namespace tfmn
