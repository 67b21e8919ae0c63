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

#ifndef TFMN_CV_HPP_
#define TFMN_CV_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <optional>
#include <vector>

#include "json.hpp"
#include "tfmn/csv.hpp"
#include "tfmn/ensemble.hpp"
#include "tfmn/error.hpp"
#include "tfmn/matrix.hpp"
#include "tfmn/rng.hpp"
#include "tfmn/stats.hpp"
#include "tfmn/text.hpp"

namespace tfmn {

inline constexpr std::size_t kDefaultFolds = 4;
inline constexpr double kSignificanceLevel = 0.05;

struct GbmGrid {
  std::vector<int> n_estimators{5, 10, 25, 50, 100, 150};
  std::vector<double> learning_rate{0.1, 0.2, 0.3, 0.5, 0.7};
  std::vector<int> max_depth{2, 3, 5, 7, 9, 12, -1};
  std::vector<MaxFeatures> max_features{MaxFeatures::kLog2, MaxFeatures::kSqrt, MaxFeatures::kAll};
  std::vector<double> subsample{0.5, 0.75, 1.0};
  std::vector<Loss> loss{Loss::kSquaredError, Loss::kAbsoluteError};

  std::vector<EnsembleConfig> expand(std::uint64_t seed) const {
    std::vector<EnsembleConfig> out;
    for (int n : n_estimators)
      for (double lr : learning_rate)
        for (int d : max_depth)
          for (MaxFeatures mf : max_features)
            for (double ss : subsample)
              for (Loss l : loss) {
                EnsembleConfig c;
                c.kind = ModelKind::kGbm;
                c.n_estimators = n;
                c.learning_rate = lr;
                c.max_depth = d;
                c.max_features = mf;
                c.subsample = ss;
                c.loss = l;
                c.seed = seed;
                out.push_back(c);
              }
    return out;
  }
};

struct RfrGrid {
  std::vector<int> n_estimators{5, 10, 25, 50, 100, 150};
  std::vector<int> max_depth{2, 3, 5, 7, 9, 12, -1};
  std::vector<MaxFeatures> max_features{MaxFeatures::kLog2, MaxFeatures::kSqrt, MaxFeatures::kAll};
  std::vector<int> max_leaf_nodes{100, 150, -1};
  std::vector<Criterion> criterion{Criterion::kSquaredError, Criterion::kFriedmanMse};

  std::vector<EnsembleConfig> expand(std::uint64_t seed) const {
    std::vector<EnsembleConfig> out;
    for (int n : n_estimators)
      for (int d : max_depth)
        for (MaxFeatures mf : max_features)
          for (int leaves : max_leaf_nodes)
            for (Criterion cr : criterion) {
              EnsembleConfig c;
              c.kind = ModelKind::kRfr;
              c.n_estimators = n;
              c.max_depth = d;
              c.max_features = mf;
              c.max_leaf_nodes = leaves;
              c.criterion = cr;
              c.seed = seed;
              out.push_back(c);
            }
    return out;
  }
};

// Seeded shuffle of row indices cut into k contiguous blocks; the first
// n % k folds get one extra row. Returns the fold of every row.
inline std::vector<int> make_folds(std::size_t n, std::size_t k, std::uint64_t seed) {
  if (k < 2 || n < 2 * k) {
    throw Error(ErrorKind::kInvalidArgument,
                "cross-validation needs k >= 2 and at least 2k rows (n=" + std::to_string(n) +
                    ", k=" + std::to_string(k) + ")");
  }
  const auto perm = random_permutation(n, derive_seed(seed, "folds"));
  std::vector<int> fold(n);
  std::size_t pos = 0;
  for (std::size_t f = 0; f < k; ++f) {
    const std::size_t size = n / k + (f < n % k ? 1 : 0);
    for (std::size_t i = 0; i < size; ++i) fold[perm[pos++]] = static_cast<int>(f);
  }
  return fold;
}

struct ConfigScore {
  std::size_t grid_index = 0;
  EnsembleConfig config;
  double r = 0;
  double p_value = 1;
  double mae = 0;
  bool degenerate = false;  // constant out-of-fold predictions
};

struct CvReport {
  EnsembleConfig config;  // chosen
  std::size_t grid_index = 0;
  std::size_t grid_size = 0;
  std::vector<std::string> feature_names;
  std::vector<std::string> row_ids;  // optional, for exports
  std::vector<int> fold_of_row;
  std::vector<double> y;
  std::vector<double> predictions;  // pooled out-of-fold, one per row
  double pearson_r = 0;
  double p_value = 1;
  double mae = 0;
  bool significant = false;  // false: no config reached p < 0.05
  std::vector<ConfigScore> scores;  // every grid entry, in grid order

  std::size_t folds() const {
    int k = 0;
    for (int f : fold_of_row) k = std::max(k, f + 1);
    return static_cast<std::size_t>(k);
  }

  // Pearson r and MAE restricted to one fold's rows.
  std::pair<double, double> fold_metrics(int fold) const {
    std::vector<double> t;
    std::vector<double> p;
    for (std::size_t i = 0; i < y.size(); ++i) {
      if (fold_of_row[i] == fold) {
        t.push_back(y[i]);
        p.push_back(predictions[i]);
      }
    }
    return {stats::pearson(t, p).r, stats::mean_absolute_error(t, p)};
  }
};

inline constexpr std::string_view kSelectionRule =
    "max |r| among configs with p < 0.05, then lower MAE, then lower grid index; "
    "max |r| overall when none is significant";

namespace detail {

// Configs identical up to n_estimators share one fit: tree t of a model
// never depends on the total number of trees.
inline bool same_group(const EnsembleConfig& a, const EnsembleConfig& b) {
  EnsembleConfig x = a;
  x.n_estimators = b.n_estimators;
  return x == b;
}

inline ConfigScore score(std::span<const double> y, std::span<const double> pred) {
  ConfigScore s;
  const auto c = stats::pearson(y, pred);
  s.r = c.r;
  s.degenerate = c.degenerate;
  s.p_value = c.degenerate ? 1.0 : stats::pearson_p_value(c.r, y.size());
  s.mae = stats::mean_absolute_error(y, pred);
  return s;
}

inline bool better_score(const ConfigScore& a, const ConfigScore& b) {
  const double ra = std::abs(a.r);
  const double rb = std::abs(b.r);
  if (ra != rb) return ra > rb;
  if (a.mae != b.mae) return a.mae < b.mae;
  return a.grid_index < b.grid_index;
}

}  // namespace detail

// Pooled out-of-fold predictions for every config in the grid.
inline std::vector<std::vector<double>> out_of_fold_predictions(
    const Matrix& x, std::span<const double> y, const std::vector<EnsembleConfig>& grid,
    const std::vector<int>& fold_of_row) {
  const std::size_t n = x.rows();
  if (y.size() != n || fold_of_row.size() != n) {
    throw Error(ErrorKind::kInvalidArgument, "X, y and folds disagree on row count");
  }
  for (const auto& c : grid) validate(c);
  int k = 0;
  for (int f : fold_of_row) k = std::max(k, f + 1);

  // Group grid entries that differ only in n_estimators.
  std::vector<std::vector<std::size_t>> groups;
  std::vector<bool> placed(grid.size(), false);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (placed[i]) continue;
    groups.push_back({i});
    placed[i] = true;
    for (std::size_t j = i + 1; j < grid.size(); ++j) {
      if (!placed[j] && detail::same_group(grid[i], grid[j])) {
        groups.back().push_back(j);
        placed[j] = true;
      }
    }
  }

  std::vector<std::vector<double>> oof(grid.size(), std::vector<double>(n, 0.0));
  for (int fold = 0; fold < k; ++fold) {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
    for (std::size_t i = 0; i < n; ++i) (fold_of_row[i] == fold ? test : train).push_back(i);
    const Matrix x_train = x.select_rows(train);
    const Matrix x_test = x.select_rows(test);
    std::vector<double> y_train(train.size());
    for (std::size_t i = 0; i < train.size(); ++i) y_train[i] = y[train[i]];
    const SortedColumns sorted(x_train);
    for (const auto& g : groups) {
      std::vector<std::size_t> counts;
      EnsembleConfig biggest = grid[g.front()];
      for (std::size_t idx : g) {
        counts.push_back(static_cast<std::size_t>(grid[idx].n_estimators));
        biggest.n_estimators = std::max(biggest.n_estimators, grid[idx].n_estimators);
      }
      const auto model = fit_ensemble(x_train, y_train, biggest, {}, &sorted);
      // staged_predict needs counts in ascending order.
      std::vector<std::size_t> order(g.size());
      for (std::size_t i = 0; i < g.size(); ++i) order[i] = i;
      std::stable_sort(order.begin(), order.end(),
                       [&](std::size_t a, std::size_t b) { return counts[a] < counts[b]; });
      std::vector<std::size_t> sorted_counts;
      for (std::size_t i : order) sorted_counts.push_back(counts[i]);
      const auto staged_sorted = model.staged_predict(x_test, sorted_counts);
      for (std::size_t s = 0; s < order.size(); ++s) {
        const std::size_t idx = g[order[s]];
        for (std::size_t t = 0; t < test.size(); ++t) oof[idx][test[t]] = staged_sorted[s][t];
      }
    }
  }
  return oof;
}

inline std::vector<ConfigScore> evaluate_grid(const Matrix& x, std::span<const double> y,
                                              const std::vector<EnsembleConfig>& grid,
                                              const std::vector<int>& fold_of_row,
                                              std::vector<std::vector<double>>* oof_out = nullptr) {
  auto oof = out_of_fold_predictions(x, y, grid, fold_of_row);
  std::vector<ConfigScore> scores;
  scores.reserve(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    ConfigScore s = detail::score(y, oof[i]);
    s.grid_index = i;
    s.config = grid[i];
    scores.push_back(s);
  }
  if (oof_out) *oof_out = std::move(oof);
  return scores;
}

inline std::size_t select_config(const std::vector<ConfigScore>& scores, bool* significant = nullptr) {
  if (scores.empty()) throw Error(ErrorKind::kInvalidArgument, "empty grid");
  std::optional<std::size_t> best_sig;
  std::size_t best_any = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const auto& s = scores[i];
    if (detail::better_score(s, scores[best_any])) best_any = i;
    if (s.p_value < kSignificanceLevel && !s.degenerate &&
        (!best_sig || detail::better_score(s, scores[*best_sig]))) {
      best_sig = i;
    }
  }
  if (significant) *significant = best_sig.has_value();
  return best_sig.value_or(best_any);
}

inline CvReport cross_validate(const Matrix& x, std::span<const double> y,
                               const std::vector<EnsembleConfig>& grid, std::size_t k,
                               std::uint64_t seed, std::vector<std::string> feature_names = {}) {
  if (grid.empty()) throw Error(ErrorKind::kInvalidArgument, "empty grid");
  if (!feature_names.empty() && feature_names.size() != x.cols()) {
    throw Error(ErrorKind::kSchemaMismatch, "feature name count differs from column count");
  }
  CvReport rep;
  rep.fold_of_row = make_folds(x.rows(), k, seed);
  std::vector<std::vector<double>> oof;
  rep.scores = evaluate_grid(x, y, grid, rep.fold_of_row, &oof);
  rep.grid_size = grid.size();
  rep.grid_index = select_config(rep.scores, &rep.significant);
  rep.config = grid[rep.grid_index];
  rep.predictions = std::move(oof[rep.grid_index]);
  rep.y.assign(y.begin(), y.end());
  const auto& s = rep.scores[rep.grid_index];
  rep.pearson_r = s.r;
  rep.p_value = s.p_value;
  rep.mae = s.mae;
  rep.feature_names = feature_names.empty() ? default_feature_names(x.cols()) : std::move(feature_names);
  return rep;
}

inline std::vector<double> permute_values(std::span<const double> y, std::span<const std::size_t> perm) {
  std::vector<double> out(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) out[i] = y[perm[i]];
  return out;
}

// Chance-level reference: rerun cross-validation with the targets shuffled
// (predictors untouched). Repetition i uses derive_seed(seed, "perm", i);
// folds use `seed`, so an identity permutation reproduces the unshuffled run.
inline std::vector<CvReport> permutation_baseline(const Matrix& x, std::span<const double> y,
                                                  const std::vector<EnsembleConfig>& grid,
                                                  std::size_t k, std::uint64_t seed,
                                                  std::size_t n_perm, bool identity = false,
                                                  std::vector<std::string> feature_names = {}) {
  if (n_perm < 1) throw Error(ErrorKind::kInvalidArgument, "n_perm must be >= 1");
  std::vector<CvReport> out;
  out.reserve(n_perm);
  for (std::size_t i = 0; i < n_perm; ++i) {
    const auto perm = identity ? identity_permutation(y.size())
                               : random_permutation(y.size(), derive_seed(seed, "perm", i));
    const auto shuffled = permute_values(y, perm);
    out.push_back(cross_validate(x, shuffled, grid, k, seed, feature_names));
  }
  return out;
}

inline nlohmann::json to_json(const CvReport& r) {
  nlohmann::json j;
  j["config"] = to_json(r.config);
  j["config_description"] = describe(r.config);
  j["grid_index"] = r.grid_index;
  j["grid_size"] = r.grid_size;
  j["features"] = r.feature_names;
  j["pearson_r"] = r.pearson_r;
  j["p_value"] = r.p_value;
  j["mae"] = r.mae;
  j["significant"] = r.significant;
  j["selection_rule"] = std::string(kSelectionRule);
  j["folds"] = r.folds();
  nlohmann::json per_fold = nlohmann::json::array();
  for (std::size_t f = 0; f < r.folds(); ++f) {
    const auto [fr, fm] = r.fold_metrics(static_cast<int>(f));
    per_fold.push_back({{"fold", f}, {"pearson_r", fr}, {"mae", fm}});
  }
  j["per_fold"] = per_fold;
  return j;
}

// One row per sample: id, fold, observed, predicted.
inline std::string format_predictions_csv(const CvReport& r) {
  std::vector<std::vector<std::string>> rows;
  for (std::size_t i = 0; i < r.y.size(); ++i) {
    rows.push_back({i < r.row_ids.size() ? r.row_ids[i] : std::to_string(i),
                    std::to_string(r.fold_of_row[i]), text::format_double(r.y[i]),
                    text::format_double(r.predictions[i])});
  }
  return csv::format({{"transcript_id", "fold", "observed", "predicted"}, rows});
}

inline std::string format_grid_csv(const CvReport& r) {
  std::vector<std::vector<std::string>> rows;
  for (const auto& s : r.scores) {
    rows.push_back({std::to_string(s.grid_index), describe(s.config), text::format_double(s.r),
                    text::format_double(s.p_value), text::format_double(s.mae)});
  }
  return csv::format({{"grid_index", "config", "pearson_r", "p_value", "mae"}, rows});
}

}  // namespace tfmn

#endif  // TFMN_CV_HPP_
