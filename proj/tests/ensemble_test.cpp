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

#include <numeric>

#include "oracles/stats_oracle.hpp"
#include "oracles/tree_oracle.hpp"
#include "tfmn/ensemble.hpp"
#include "tfmn/rng.hpp"

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
    d.y[r] = 2 * d.x(r, 0) - d.x(r, m > 1 ? 1 : 0) * d.x(r, 0) + 0.1 * rng.uniform01();
  }
  return d;
}

EnsembleConfig gbm(int n, double lr, int depth) {
  EnsembleConfig c;
  c.kind = ModelKind::kGbm;
  c.n_estimators = n;
  c.learning_rate = lr;
  c.max_depth = depth;
  return c;
}

EnsembleConfig rfr(int n) {
  EnsembleConfig c;
  c.kind = ModelKind::kRfr;
  c.n_estimators = n;
  return c;
}

TEST(EnsembleTest, GbmOnConstantTargetPredictsTheMean) {
  auto d = make_data(30, 2, 1);
  std::fill(d.y.begin(), d.y.end(), 7.5);
  const auto m = fit_gbm(d.x, d.y, gbm(5, 1.0, 1));
  for (double p : m.predict(d.x)) EXPECT_DOUBLE_EQ(p, 7.5);
  for (const auto& t : m.trees) EXPECT_EQ(t.nodes.size(), 1u);
}

TEST(EnsembleTest, ZeroLearningRateGivesBaseValue) {
  const auto d = make_data(30, 2, 2);
  const auto m = fit_gbm(d.x, d.y, gbm(10, 0.0, 3));
  const double mean = std::accumulate(d.y.begin(), d.y.end(), 0.0) / 30;
  for (double p : m.predict(d.x)) EXPECT_NEAR(p, mean, 1e-12);
}

TEST(EnsembleTest, GbmMatchesStagewiseOracle) {
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    const auto d = make_data(40, 3, 10 + seed);
    const int depth = 1 + static_cast<int>(seed % 3);
    const double lr = 0.05 + 0.1 * static_cast<double>(seed);
    const auto m = fit_gbm(d.x, d.y, gbm(15, lr, depth));
    std::vector<std::size_t> rows(40);
    std::iota(rows.begin(), rows.end(), 0);
    const std::vector<double> w(40, 1.0);
    std::vector<double> f(40, std::accumulate(d.y.begin(), d.y.end(), 0.0) / 40);
    for (int t = 0; t < 15; ++t) {
      std::vector<double> resid(40);
      for (std::size_t i = 0; i < 40; ++i) resid[i] = d.y[i] - f[i];
      const auto tree = oracle::grow(d.x, resid, w, rows, depth);
      for (std::size_t i = 0; i < 40; ++i) f[i] += lr * tree->predict(d.x.row(i));
    }
    const auto p = m.predict(d.x);
    for (std::size_t i = 0; i < 40; ++i) EXPECT_NEAR(p[i], f[i], 1e-9);
  }
}

TEST(EnsembleTest, GbmTrainingLossIsNonIncreasing) {
  const auto d = make_data(60, 3, 3);
  for (Loss loss : {Loss::kSquaredError, Loss::kAbsoluteError}) {
    auto cfg = gbm(40, 0.2, 2);
    cfg.loss = loss;
    const auto m = fit_gbm(d.x, d.y, cfg);
    std::vector<std::size_t> counts(41);
    std::iota(counts.begin(), counts.end(), 0);
    const auto staged = m.staged_predict(d.x, counts);
    double prev = std::numeric_limits<double>::infinity();
    for (const auto& p : staged) {
      double l = 0;
      for (std::size_t i = 0; i < 60; ++i)
        l += loss == Loss::kSquaredError ? (p[i] - d.y[i]) * (p[i] - d.y[i]) : std::abs(p[i] - d.y[i]);
      EXPECT_LE(l, prev + 1e-12);
      prev = l;
    }
  }
}

TEST(EnsembleTest, AbsoluteLossStartsAtMedianAndResistsOutliers) {
  auto d = make_data(41, 2, 4);
  d.y[0] = 1e6;
  auto cfg = gbm(0, 0.1, 2);
  cfg.n_estimators = 1;
  cfg.loss = Loss::kAbsoluteError;
  const auto m = fit_gbm(d.x, d.y, cfg);
  auto sorted = d.y;
  std::sort(sorted.begin(), sorted.end());
  EXPECT_DOUBLE_EQ(m.init, sorted[20]);
  cfg.n_estimators = 50;
  const auto p = fit_gbm(d.x, d.y, cfg).predict(d.x);
  for (std::size_t i = 1; i < 41; ++i) EXPECT_LT(std::abs(p[i]), 10.0);
}

TEST(EnsembleTest, RfrIsTheMeanOfItsTrees) {
  const auto d = make_data(50, 3, 5);
  const auto m = fit_rfr(d.x, d.y, rfr(12));
  ASSERT_EQ(m.trees.size(), 12u);
  for (std::size_t r = 0; r < 50; ++r) {
    double s = 0;
    for (const auto& t : m.trees) s += t.predict(d.x.row(r));
    EXPECT_NEAR(m.predict(d.x.row(r)), s / 12, 1e-12);
  }
  for (const auto& t : m.trees) EXPECT_DOUBLE_EQ(t.nodes[0].cover, 50.0);
}

TEST(EnsembleTest, RfrLearnsIdentity) {
  Matrix x(100, 1);
  std::vector<double> y(100);
  for (std::size_t i = 0; i < 100; ++i) x(i, 0) = y[i] = static_cast<double>(i) / 100;
  const auto m = fit_rfr(x, y, rfr(50));
  const auto probe_pred = m.predict(x);
  EXPECT_GT(stats::pearson(probe_pred, y).r, 0.9);
}

TEST(EnsembleTest, StagedPredictMatchesPrefixes) {
  const auto d = make_data(30, 3, 6);
  for (const auto& cfg : {gbm(20, 0.3, 2), rfr(20)}) {
    const auto m = fit_ensemble(d.x, d.y, cfg);
    const std::vector<std::size_t> counts{1, 5, 12, 20};
    const auto staged = m.staged_predict(d.x, counts);
    for (std::size_t i = 0; i < counts.size(); ++i) {
      for (std::size_t r = 0; r < 30; ++r)
        EXPECT_NEAR(staged[i][r], m.predict_prefix(d.x.row(r), counts[i]), 1e-12);
    }
    // A prefix of a large fit equals a smaller fit.
    auto small = cfg;
    small.n_estimators = 5;
    const auto ms = fit_ensemble(d.x, d.y, small);
    for (std::size_t r = 0; r < 30; ++r) EXPECT_EQ(ms.predict(d.x.row(r)), staged[1][r]);
  }
}

TEST(EnsembleTest, SeedsControlRandomness) {
  const auto d = make_data(40, 6, 7);
  auto cfg = gbm(10, 0.1, 3);
  cfg.subsample = 0.5;
  cfg.max_features = MaxFeatures::kSqrt;
  EXPECT_EQ(fit_gbm(d.x, d.y, cfg).trees, fit_gbm(d.x, d.y, cfg).trees);
  auto other = cfg;
  other.seed = 99;
  EXPECT_NE(fit_gbm(d.x, d.y, cfg).trees, fit_gbm(d.x, d.y, other).trees);
  auto r = rfr(5);
  EXPECT_EQ(fit_rfr(d.x, d.y, r).trees, fit_rfr(d.x, d.y, r).trees);
}

TEST(EnsembleTest, JsonRoundTrip) {
  const auto d = make_data(40, 3, 8);
  auto cfg = gbm(8, 0.3, 3);
  cfg.loss = Loss::kAbsoluteError;
  cfg.subsample = 0.7;
  for (const auto& c : {cfg, rfr(6)}) {
    const auto m = fit_ensemble(d.x, d.y, c, {"a", "b", "c"});
    const auto j = to_json(m);
    const auto back = ensemble_from_json(nlohmann::json::parse(j.dump()));
    EXPECT_EQ(back.config, m.config);
    EXPECT_EQ(back.feature_names, m.feature_names);
    EXPECT_EQ(to_json(back), j);
    for (std::size_t r = 0; r < 40; ++r) EXPECT_EQ(back.predict(d.x.row(r)), m.predict(d.x.row(r)));
  }
  EXPECT_EQ(config_from_json(to_json(cfg)), cfg);
  EXPECT_THROW(ensemble_from_json(nlohmann::json{{"format", "other"}}), Error);
}

TEST(EnsembleTest, SchemaAndValidationErrors) {
  const auto d = make_data(20, 3, 9);
  const auto m = fit_gbm(d.x, d.y, gbm(3, 0.1, 2));
  try {
    m.predict(Matrix(2, 2));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kSchemaMismatch);
  }
  auto bad = gbm(0, 0.1, 2);
  EXPECT_THROW(validate(bad), Error);
  bad = gbm(5, 0.1, 2);
  bad.subsample = 0;
  EXPECT_THROW(validate(bad), Error);
  EXPECT_THROW(fit_rfr(d.x, d.y, gbm(3, 0.1, 2)), Error);
  EXPECT_EQ(parse_max_features("None"), MaxFeatures::kAll);
  EXPECT_EQ(parse_loss("absolute_error"), Loss::kAbsoluteError);
  EXPECT_FALSE(parse_model_kind("svm"));
}

}  // namespace
}  // namespace tfmn
