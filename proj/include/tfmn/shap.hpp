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

#ifndef TFMN_SHAP_HPP_
#define TFMN_SHAP_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"
#include "tfmn/csv.hpp"
#include "tfmn/cv.hpp"
#include "tfmn/ensemble.hpp"
#include "tfmn/error.hpp"
#include "tfmn/matrix.hpp"
#include "tfmn/rng.hpp"
#include "tfmn/stats.hpp"
#include "tfmn/text.hpp"
#include "tfmn/tree.hpp"

namespace tfmn {

// Short codes used to label features in plots.
inline std::string feature_code(std::string_view name) {
  static constexpr std::pair<std::string_view, std::string_view> kCodes[] = {
      {"modularity", "1"},       {"core_number", "2"},     {"local_efficiency", "3"},
      {"max_closeness", "4"},    {"age", "5"},             {"mean_betweenness", "6"},
      {"max_betweenness", "7"},  {"sadness", "S"},         {"joy", "J"},
      {"disgust", "D"},          {"fear", "F"},            {"anticipation", "A"},
      {"surprise", "U"},         {"trust", "T"},           {"anger", "G"}};
  for (const auto& [n, c] : kCodes) {
    if (n == name) return std::string(c);
  }
  return std::string(name);
}

namespace detail {

struct PathElement {
  int feature = -1;
  double zero_fraction = 0;
  double one_fraction = 0;
  double pweight = 0;
};

inline void extend_path(PathElement* path, int depth, double zero_fraction, double one_fraction,
                        int feature) {
  path[depth] = {feature, zero_fraction, one_fraction, depth == 0 ? 1.0 : 0.0};
  for (int i = depth - 1; i >= 0; --i) {
    path[i + 1].pweight += one_fraction * path[i].pweight * (i + 1) / static_cast<double>(depth + 1);
    path[i].pweight = zero_fraction * path[i].pweight * (depth - i) / static_cast<double>(depth + 1);
  }
}

inline void unwind_path(PathElement* path, int depth, int index) {
  const double one = path[index].one_fraction;
  const double zero = path[index].zero_fraction;
  double next = path[depth].pweight;
  for (int i = depth - 1; i >= 0; --i) {
    if (one != 0) {
      const double tmp = path[i].pweight;
      path[i].pweight = next * (depth + 1) / ((i + 1) * one);
      next = tmp - path[i].pweight * zero * (depth - i) / static_cast<double>(depth + 1);
    } else {
      path[i].pweight = path[i].pweight * (depth + 1) / (zero * (depth - i));
    }
  }
  for (int i = index; i < depth; ++i) {
    path[i].feature = path[i + 1].feature;
    path[i].zero_fraction = path[i + 1].zero_fraction;
    path[i].one_fraction = path[i + 1].one_fraction;
  }
}

// Total weight of the path with element `index` removed, without modifying it.
inline double unwound_path_sum(const PathElement* path, int depth, int index) {
  const double one = path[index].one_fraction;
  const double zero = path[index].zero_fraction;
  double next = path[depth].pweight;
  double total = 0;
  for (int i = depth - 1; i >= 0; --i) {
    if (one != 0) {
      const double tmp = next * (depth + 1) / ((i + 1) * one);
      total += tmp;
      next = path[i].pweight - tmp * zero * (depth - i) / static_cast<double>(depth + 1);
    } else if (zero != 0) {
      total += path[i].pweight / zero / ((depth - i) / static_cast<double>(depth + 1));
    }
  }
  return total;
}

inline void tree_shap_recurse(const RegressionTree& tree, std::span<const double> x,
                              std::span<double> phi, int node, std::vector<PathElement>& storage,
                              std::size_t offset, int depth, double zero_fraction,
                              double one_fraction, int feature) {
  // Each level works on its own copy of the parent path.
  PathElement* parent = storage.data() + offset;
  PathElement* path = parent + depth;
  if (depth > 0) std::copy(parent, parent + depth, path);
  extend_path(path, depth, zero_fraction, one_fraction, feature);

  const auto& n = tree.nodes[static_cast<std::size_t>(node)];
  if (n.is_leaf()) {
    for (int i = 1; i <= depth; ++i) {
      const double w = unwound_path_sum(path, depth, i);
      phi[static_cast<std::size_t>(path[i].feature)] +=
          w * (path[i].one_fraction - path[i].zero_fraction) * n.value;
    }
    return;
  }
  const bool go_left = x[static_cast<std::size_t>(n.feature)] <= n.threshold;
  const int hot = go_left ? n.left : n.right;
  const int cold = go_left ? n.right : n.left;
  const double hot_cover = tree.nodes[static_cast<std::size_t>(hot)].cover;
  const double cold_cover = tree.nodes[static_cast<std::size_t>(cold)].cover;

  double incoming_zero = 1;
  double incoming_one = 1;
  int seen = 0;
  for (; seen <= depth; ++seen) {
    if (path[seen].feature == n.feature) break;
  }
  if (seen <= depth) {
    incoming_zero = path[seen].zero_fraction;
    incoming_one = path[seen].one_fraction;
    unwind_path(path, depth, seen);
    --depth;
  }
  const std::size_t child_offset = offset + static_cast<std::size_t>(path - parent);
  tree_shap_recurse(tree, x, phi, hot, storage, child_offset, depth + 1,
                    incoming_zero * hot_cover / n.cover, incoming_one, n.feature);
  tree_shap_recurse(tree, x, phi, cold, storage, child_offset, depth + 1,
                    incoming_zero * cold_cover / n.cover, 0.0, n.feature);
}

}  // namespace detail

// Path-dependent TreeSHAP for one tree: phi[f] receives each feature's
// contribution; sum(phi) + tree.expected_value() == tree.predict(x).
inline void tree_shap(const RegressionTree& tree, std::span<const double> x, std::span<double> phi) {
  const int max_depth = tree.depth() + 2;
  std::vector<detail::PathElement> storage(
      static_cast<std::size_t>((max_depth * (max_depth + 1)) / 2 + max_depth + 1));
  detail::tree_shap_recurse(tree, x, phi, 0, storage, 0, 0, 1.0, 1.0, -1);
}

struct ShapMatrix {
  // Columns ordered by mean |SHAP| descending (ties by model column order).
  std::vector<std::string> feature_names;
  std::vector<std::size_t> model_column;  // model feature index of each column
  Matrix values;                          // samples x features
  double base_value = 0;
  std::vector<double> predictions;

  double mean_abs(std::size_t col) const {
    double s = 0;
    for (std::size_t r = 0; r < values.rows(); ++r) s += std::abs(values(r, col));
    return values.rows() ? s / static_cast<double>(values.rows()) : 0.0;
  }

  std::size_t column_of(std::string_view name) const {
    for (std::size_t i = 0; i < feature_names.size(); ++i) {
      if (feature_names[i] == name) return i;
    }
    throw Error(ErrorKind::kInvalidArgument, "no SHAP column named " + std::string(name));
  }

  // Largest |base + sum(phi) - prediction| over samples.
  double max_local_accuracy_error() const {
    double worst = 0;
    for (std::size_t r = 0; r < values.rows(); ++r) {
      double s = base_value;
      for (std::size_t c = 0; c < values.cols(); ++c) s += values(r, c);
      worst = std::max(worst, std::abs(s - predictions[r]));
    }
    return worst;
  }
};

inline constexpr double kLocalAccuracyTolerance = 1e-6;

inline ShapMatrix tree_shap(const TrainedEnsemble& model, const Matrix& x) {
  if (x.cols() != model.num_features()) {
    throw Error(ErrorKind::kSchemaMismatch, "SHAP input has " + std::to_string(x.cols()) +
                                                " columns, model expects " +
                                                std::to_string(model.num_features()));
  }
  const std::size_t nf = x.cols();
  const std::size_t nt = model.trees.size();
  const double w = model.tree_weight(nt);
  double base = model.config.kind == ModelKind::kGbm ? model.init : 0.0;
  for (const auto& t : model.trees) base += w * t.expected_value();

  Matrix raw(x.rows(), nf);
  std::vector<double> phi(nf);
  std::vector<double> predictions(x.rows());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    const auto row = x.row(r);
    for (const auto& t : model.trees) {
      std::fill(phi.begin(), phi.end(), 0.0);
      tree_shap(t, row, phi);
      for (std::size_t f = 0; f < nf; ++f) raw(r, f) += w * phi[f];
    }
    predictions[r] = model.predict(row);
  }

  std::vector<double> mean_abs(nf, 0.0);
  for (std::size_t r = 0; r < x.rows(); ++r) {
    for (std::size_t f = 0; f < nf; ++f) mean_abs[f] += std::abs(raw(r, f));
  }
  std::vector<std::size_t> order(nf);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return mean_abs[a] > mean_abs[b]; });

  ShapMatrix out;
  out.model_column = order;
  out.values = raw.select_columns(order);
  for (std::size_t f : order) out.feature_names.push_back(model.feature_names[f]);
  out.base_value = base;
  out.predictions = std::move(predictions);
  const double err = out.max_local_accuracy_error();
  const double scale = std::max(1.0, std::abs(base));
  if (!(err <= kLocalAccuracyTolerance * scale)) {
    throw Error(ErrorKind::kStageFailure,
                "SHAP local accuracy violated (max error " + text::format_double(err) + ")");
  }
  return out;
}

inline constexpr double kDefaultEliminationDelta = 0.01;

struct EliminationStep {
  std::string feature;
  double mean_abs_shap = 0;
  double r_base = 0;
  std::vector<double> r_shuffled;  // one per shuffle repetition
  double r_shuffled_median = 0;
  double drop = 0;                 // r_base - median shuffled r
  bool removed = false;
  std::string note;
};

struct EliminationResult {
  std::vector<std::string> kept;
  std::vector<std::size_t> kept_columns;  // indices into the input matrix
  std::vector<EliminationStep> trace;
  EnsembleConfig config;
  CvReport final_report;
  double delta = kDefaultEliminationDelta;
  std::size_t n_shuffles = 1;
  std::uint64_t seed = 0;
};

// Top-down elimination guided by SHAP. A grid search on all features picks
// the configuration; features are then visited from lowest to highest mean
// |SHAP| of a model fit on all rows. Each visited column is shuffled (seeded)
// and the chosen configuration cross-validated again; when the pooled r falls
// by no more than delta the column is dropped for good and the baseline r is
// re-measured without it. At least one feature always survives.
inline EliminationResult shap_feature_elimination(const Matrix& x, std::span<const double> y,
                                                  const std::vector<EnsembleConfig>& grid,
                                                  std::size_t k, std::uint64_t seed,
                                                  std::vector<std::string> names = {},
                                                  double delta = kDefaultEliminationDelta,
                                                  std::size_t n_shuffles = 1) {
  if (n_shuffles < 1) throw Error(ErrorKind::kInvalidArgument, "n_shuffles must be >= 1");
  if (!(delta >= 0)) throw Error(ErrorKind::kInvalidArgument, "delta must be >= 0");
  if (names.empty()) names = default_feature_names(x.cols());
  if (names.size() != x.cols()) {
    throw Error(ErrorKind::kSchemaMismatch, "feature name count differs from column count");
  }
  EliminationResult result;
  result.delta = delta;
  result.n_shuffles = n_shuffles;
  result.seed = seed;

  const CvReport initial = cross_validate(x, y, grid, k, seed, names);
  result.config = initial.config;
  const std::vector<EnsembleConfig> chosen{initial.config};
  const TrainedEnsemble full = fit_ensemble(x, y, initial.config, names);
  const ShapMatrix shap = tree_shap(full, x);

  std::vector<std::size_t> kept(x.cols());
  std::iota(kept.begin(), kept.end(), 0);
  double r_base = initial.pearson_r;
  const auto subset_names = [&](const std::vector<std::size_t>& cols) {
    std::vector<std::string> out;
    for (std::size_t c : cols) out.push_back(names[c]);
    return out;
  };

  // Ascending mean |SHAP|; ShapMatrix columns are descending.
  for (std::size_t i = shap.feature_names.size(); i-- > 0;) {
    const std::size_t col = shap.model_column[i];
    EliminationStep step;
    step.feature = names[col];
    step.mean_abs_shap = shap.mean_abs(i);
    step.r_base = r_base;
    if (kept.size() == 1) {
      step.note = "last remaining feature";
      result.trace.push_back(step);
      continue;
    }
    Matrix current = x.select_columns(kept);
    const std::size_t pos =
        static_cast<std::size_t>(std::find(kept.begin(), kept.end(), col) - kept.begin());
    const auto current_names = subset_names(kept);
    for (std::size_t s = 0; s < n_shuffles; ++s) {
      Matrix shuffled = current;
      const auto column = current.column(pos);
      const auto perm = random_permutation(
          column.size(), derive_seed(derive_seed(seed, "shuffle", col), "repeat", s));
      shuffled.set_column(pos, permute_values(column, perm));
      step.r_shuffled.push_back(cross_validate(shuffled, y, chosen, k, seed, current_names).pearson_r);
    }
    step.r_shuffled_median = stats::median(step.r_shuffled);
    step.drop = r_base - step.r_shuffled_median;
    if (step.drop <= delta) {
      step.removed = true;
      kept.erase(kept.begin() + static_cast<std::ptrdiff_t>(pos));
      r_base = cross_validate(x.select_columns(kept), y, chosen, k, seed, subset_names(kept)).pearson_r;
    }
    result.trace.push_back(step);
  }
  result.kept_columns = kept;
  result.kept = subset_names(kept);
  result.final_report = cross_validate(x.select_columns(kept), y, chosen, k, seed, result.kept);
  return result;
}

inline nlohmann::json to_json(const EliminationResult& r) {
  nlohmann::json j;
  j["delta"] = r.delta;
  j["n_shuffles"] = r.n_shuffles;
  j["seed"] = r.seed;
  j["config"] = to_json(r.config);
  j["kept"] = r.kept;
  nlohmann::json steps = nlohmann::json::array();
  for (const auto& s : r.trace) {
    nlohmann::json e;
    e["feature"] = s.feature;
    e["code"] = feature_code(s.feature);
    e["mean_abs_shap"] = s.mean_abs_shap;
    e["r_base"] = s.r_base;
    e["r_shuffled"] = s.r_shuffled;
    e["r_shuffled_median"] = s.r_shuffled_median;
    e["drop"] = s.drop;
    e["removed"] = s.removed;
    if (!s.note.empty()) e["note"] = s.note;
    steps.push_back(e);
  }
  j["trace"] = steps;
  j["final"] = to_json(r.final_report);
  return j;
}

struct PlotBundle {
  std::string beeswarm_csv;  // feature, code, sample, value, shap
  std::string bar_csv;       // feature, code, mean_abs_shap
  std::string heatmap_csv;   // sample, prediction, one column per feature
  nlohmann::json summary;
};

inline constexpr double kShapScaleLo = -5.0;
inline constexpr double kShapScaleHi = 5.0;

// x_scaled holds the model's feature columns in model order, already scaled
// to the plotting range. Heatmap rows are sorted by prediction (ascending,
// ties by sample order).
inline PlotBundle export_plots(const ShapMatrix& shap, const Matrix& x_scaled,
                               const std::vector<std::string>& sample_ids = {}) {
  if (x_scaled.rows() != shap.values.rows() || x_scaled.cols() != shap.values.cols()) {
    throw Error(ErrorKind::kSchemaMismatch, "scaled matrix shape differs from SHAP matrix");
  }
  const std::size_t n = shap.values.rows();
  const auto id = [&](std::size_t r) {
    return r < sample_ids.size() ? sample_ids[r] : std::to_string(r);
  };
  PlotBundle b;
  csv::Table bee{{"feature", "code", "sample", "value", "shap"}, {}};
  csv::Table bar{{"feature", "code", "mean_abs_shap"}, {}};
  for (std::size_t c = 0; c < shap.values.cols(); ++c) {
    const auto& name = shap.feature_names[c];
    for (std::size_t r = 0; r < n; ++r) {
      bee.rows.push_back({name, feature_code(name), id(r),
                          text::format_double(x_scaled(r, shap.model_column[c])),
                          text::format_double(shap.values(r, c))});
    }
    bar.rows.push_back({name, feature_code(name), text::format_double(shap.mean_abs(c))});
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return shap.predictions[a] < shap.predictions[b];
  });
  csv::Table heat{{"sample", "prediction"}, {}};
  for (const auto& name : shap.feature_names) heat.header.push_back(feature_code(name));
  for (std::size_t r : order) {
    std::vector<std::string> row{id(r), text::format_double(shap.predictions[r])};
    for (std::size_t c = 0; c < shap.values.cols(); ++c) {
      row.push_back(text::format_double(shap.values(r, c)));
    }
    heat.rows.push_back(std::move(row));
  }
  b.beeswarm_csv = csv::format(bee);
  b.bar_csv = csv::format(bar);
  b.heatmap_csv = csv::format(heat);
  b.summary["base_value"] = shap.base_value;
  b.summary["samples"] = n;
  b.summary["features"] = shap.feature_names;
  b.summary["max_local_accuracy_error"] = shap.max_local_accuracy_error();
  b.summary["scale"] = {kShapScaleLo, kShapScaleHi};
  return b;
}

}  // namespace tfmn

#endif  // TFMN_SHAP_HPP_
