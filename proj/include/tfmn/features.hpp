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

#ifndef TFMN_FEATURES_HPP_
#define TFMN_FEATURES_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "tfmn/conllu.hpp"
#include "tfmn/csv.hpp"
#include "tfmn/emotions.hpp"
#include "tfmn/error.hpp"
#include "tfmn/matrix.hpp"
#include "tfmn/metrics.hpp"
#include "tfmn/stats.hpp"
#include "tfmn/text.hpp"

namespace tfmn {

inline constexpr std::array<std::string_view, 3> kTargetColumns = {
    "social_maladjustment", "specific_internalising", "neurodevelopmental_risk"};

enum class ColumnGroup { kNetwork, kEmotion, kDemographic };

enum class FeatureSubset { kCombined, kNetwork, kEmotion };

inline std::string_view to_string(FeatureSubset s) {
  switch (s) {
    case FeatureSubset::kCombined: return "combined";
    case FeatureSubset::kNetwork: return "network";
    case FeatureSubset::kEmotion: return "emotion";
  }
  return "combined";
}

inline std::optional<FeatureSubset> parse_subset(std::string_view s) {
  if (s == "combined") return FeatureSubset::kCombined;
  if (s == "network") return FeatureSubset::kNetwork;
  if (s == "emotion") return FeatureSubset::kEmotion;
  return std::nullopt;
}

struct ScalingRecord {
  std::string column;
  double min = 0;
  double max = 0;
  double lo = 0;
  double hi = 1;
  bool constant = false;  // max == min; every value mapped to the midpoint
};

// One row per transcript: predictors (network metrics, emotion z-scores,
// age, sex) and target scores.
struct FeatureTable {
  std::vector<std::string> ids;
  std::vector<std::string> predictor_names;
  std::vector<ColumnGroup> predictor_groups;
  Matrix predictors;
  std::vector<std::string> target_names;
  Matrix targets;
  std::vector<ScalingRecord> scaling;  // empty until scaled

  std::size_t rows() const { return ids.size(); }
  std::size_t num_predictors() const { return predictor_names.size(); }

  std::optional<std::size_t> predictor_index(std::string_view name) const {
    for (std::size_t i = 0; i < predictor_names.size(); ++i) {
      if (predictor_names[i] == name) return i;
    }
    return std::nullopt;
  }

  std::optional<std::size_t> target_index(std::string_view name) const {
    for (std::size_t i = 0; i < target_names.size(); ++i) {
      if (target_names[i] == name) return i;
    }
    return std::nullopt;
  }

  std::vector<double> target(std::size_t j) const { return targets.column(j); }

  FeatureTable select_predictors(const std::vector<std::size_t>& cols) const {
    FeatureTable out = *this;
    out.predictor_names.clear();
    out.predictor_groups.clear();
    out.scaling.clear();
    for (std::size_t c : cols) {
      out.predictor_names.push_back(predictor_names[c]);
      out.predictor_groups.push_back(predictor_groups[c]);
      if (!scaling.empty()) out.scaling.push_back(scaling[c]);
    }
    out.predictors = predictors.select_columns(cols);
    return out;
  }

  FeatureTable select_predictors(const std::vector<std::string>& names) const {
    std::vector<std::size_t> cols;
    for (const auto& n : names) {
      auto idx = predictor_index(n);
      if (!idx) throw Error(ErrorKind::kSchemaMismatch, "no predictor column '" + n + "'");
      cols.push_back(*idx);
    }
    return select_predictors(cols);
  }

  // Network-only and emotion-only subsets keep the demographic columns.
  FeatureTable subset(FeatureSubset which) const {
    std::vector<std::size_t> cols;
    for (std::size_t c = 0; c < predictor_groups.size(); ++c) {
      const ColumnGroup g = predictor_groups[c];
      const bool keep = which == FeatureSubset::kCombined || g == ColumnGroup::kDemographic ||
                        (which == FeatureSubset::kNetwork && g == ColumnGroup::kNetwork) ||
                        (which == FeatureSubset::kEmotion && g == ColumnGroup::kEmotion);
      if (keep) cols.push_back(c);
    }
    return select_predictors(cols);
  }
};

// Target scores keyed by transcript id; nullopt marks a missing score.
struct TargetScores {
  std::vector<std::string> names;
  std::map<std::string, std::vector<std::optional<double>>> values;
};

inline TargetScores parse_targets_csv(std::string_view content, const std::string& source = "<targets>") {
  const auto table = csv::parse(content, source);
  if (table.header.empty() || table.header[0] != "transcript_id") {
    throw Error(ErrorKind::kSchemaMismatch, source + ": first column must be transcript_id");
  }
  TargetScores out;
  out.names.assign(table.header.begin() + 1, table.header.end());
  for (const auto& row : table.rows) {
    std::vector<std::optional<double>> scores;
    for (std::size_t c = 1; c < row.size(); ++c) scores.push_back(text::parse_double(row[c]));
    out.values[std::string(text::trim(row[0]))] = std::move(scores);
  }
  return out;
}

// transcript_id,age,sex
inline std::map<std::string, Demographics> parse_demographics_csv(
    std::string_view content, const std::string& source = "<demographics>") {
  const auto table = csv::parse(content, source);
  const auto id = table.column_index("transcript_id");
  const auto age = table.column_index("age");
  const auto sex = table.column_index("sex");
  if (!id || !age || !sex) {
    throw Error(ErrorKind::kSchemaMismatch, source + ": need transcript_id, age, sex columns");
  }
  std::map<std::string, Demographics> out;
  for (const auto& row : table.rows) {
    Demographics d;
    d.age = text::parse_double(row[*age]);
    d.sex = parse_sex_code(row[*sex]);
    out[std::string(text::trim(row[*id]))] = d;
  }
  return out;
}

struct ExcludedRow {
  std::string transcript_id;
  std::string reason;
};

struct AssembleResult {
  FeatureTable table;
  std::vector<ExcludedRow> excluded;
};

// Inner join on transcript id. Rows are ordered by id; a transcript missing
// any input, demographic value or target score is excluded and logged.
inline AssembleResult assemble(const std::map<std::string, metrics::MetricVector>& network,
                               const std::map<std::string, EmotionProfile>& profiles,
                               const std::map<std::string, Demographics>& demographics,
                               const TargetScores& targets) {
  AssembleResult result;
  FeatureTable& t = result.table;
  for (auto name : metrics::kMetricColumns) {
    t.predictor_names.emplace_back(name);
    t.predictor_groups.push_back(ColumnGroup::kNetwork);
  }
  for (auto name : kEmotionNames) {
    t.predictor_names.emplace_back(name);
    t.predictor_groups.push_back(ColumnGroup::kEmotion);
  }
  for (auto name : {"age", "sex"}) {
    t.predictor_names.emplace_back(name);
    t.predictor_groups.push_back(ColumnGroup::kDemographic);
  }
  t.target_names = targets.names;

  std::vector<std::vector<double>> rows;
  std::vector<std::vector<double>> target_rows;
  for (const auto& [id, mv] : network) {
    const auto reject = [&](const std::string& reason) { result.excluded.push_back({id, reason}); };
    auto p = profiles.find(id);
    if (p == profiles.end()) {
      reject("MissingEmotionProfile");
      continue;
    }
    auto d = demographics.find(id);
    if (d == demographics.end() || !d->second.age || !d->second.sex) {
      reject("MissingDemographics");
      continue;
    }
    auto s = targets.values.find(id);
    if (s == targets.values.end() ||
        std::any_of(s->second.begin(), s->second.end(), [](const auto& v) { return !v; })) {
      reject("MissingTarget");
      continue;
    }
    std::vector<double> row;
    for (double v : mv.values()) row.push_back(v);
    for (double z : p->second.z) row.push_back(z);
    row.push_back(*d->second.age);
    row.push_back(*d->second.sex);
    rows.push_back(std::move(row));
    std::vector<double> tr;
    for (const auto& v : s->second) tr.push_back(*v);
    target_rows.push_back(std::move(tr));
    t.ids.push_back(id);
  }
  for (const auto& [id, unused] : profiles) {
    if (!network.count(id)) result.excluded.push_back({id, "MissingNetwork"});
  }
  t.predictors = Matrix(rows.size(), t.predictor_names.size());
  t.targets = Matrix(rows.size(), t.target_names.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < rows[r].size(); ++c) t.predictors(r, c) = rows[r][c];
    for (std::size_t c = 0; c < target_rows[r].size(); ++c) t.targets(r, c) = target_rows[r][c];
  }
  return result;
}

// x' = lo + (hi - lo)(x - min)/(max - min) per predictor column. Constant
// columns map to the midpoint and are flagged in the scaling record.
inline FeatureTable minmax_scale(const FeatureTable& t, double lo, double hi) {
  if (!(hi > lo)) throw Error(ErrorKind::kInvalidArgument, "scaling range needs hi > lo");
  FeatureTable out = t;
  out.scaling.clear();
  for (std::size_t c = 0; c < t.num_predictors(); ++c) {
    ScalingRecord rec;
    rec.column = t.predictor_names[c];
    rec.lo = lo;
    rec.hi = hi;
    if (t.rows() > 0) {
      const auto col = t.predictors.column(c);
      rec.min = *std::min_element(col.begin(), col.end());
      rec.max = *std::max_element(col.begin(), col.end());
    }
    rec.constant = !(rec.max > rec.min);
    for (std::size_t r = 0; r < t.rows(); ++r) {
      out.predictors(r, c) = rec.constant
                                 ? 0.5 * (lo + hi)
                                 : std::clamp(lo + (hi - lo) * (t.predictors(r, c) - rec.min) /
                                                       (rec.max - rec.min),
                                              lo, hi);
    }
    out.scaling.push_back(rec);
  }
  return out;
}

// Undoes minmax_scale. Constant columns come back as their recorded value.
inline FeatureTable inverse_scale(const FeatureTable& t) {
  if (t.scaling.size() != t.num_predictors()) {
    throw Error(ErrorKind::kInvalidArgument, "table carries no scaling records");
  }
  FeatureTable out = t;
  for (std::size_t c = 0; c < t.num_predictors(); ++c) {
    const auto& rec = t.scaling[c];
    for (std::size_t r = 0; r < t.rows(); ++r) {
      out.predictors(r, c) =
          rec.constant ? rec.min
                       : rec.min + (t.predictors(r, c) - rec.lo) * (rec.max - rec.min) / (rec.hi - rec.lo);
    }
  }
  out.scaling.clear();
  return out;
}

struct ScreenResult {
  double threshold = 0.1;
  Matrix predictor_corr;                     // predictors x predictors
  Matrix target_corr;                        // predictors x targets
  std::vector<bool> degenerate;              // zero-variance predictor
  std::vector<std::vector<std::size_t>> groups;
  std::vector<std::string> selected;         // in column order
};

// Groups predictors into connected components of the graph joining pairs
// with |r| > threshold, then keeps from each group the column with the
// largest |r| against the chosen target (lowest column index on ties).
// Zero-variance predictors have r = 0 everywhere and are never selected.
inline ScreenResult correlation_screen(const FeatureTable& t, double threshold,
                                       std::size_t target_index = 0) {
  if (t.rows() < 3) throw Error(ErrorKind::kInvalidArgument, "correlation screen needs >= 3 rows");
  if (target_index >= t.target_names.size()) {
    throw Error(ErrorKind::kInvalidArgument, "target index out of range");
  }
  const std::size_t p = t.num_predictors();
  ScreenResult res;
  res.threshold = threshold;
  res.predictor_corr = Matrix(p, p);
  res.target_corr = Matrix(p, t.target_names.size());
  res.degenerate.assign(p, false);
  std::vector<std::vector<double>> cols(p);
  for (std::size_t c = 0; c < p; ++c) cols[c] = t.predictors.column(c);
  for (std::size_t a = 0; a < p; ++a) {
    res.predictor_corr(a, a) = 1.0;
    for (std::size_t b = a + 1; b < p; ++b) {
      const auto c = stats::pearson(cols[a], cols[b]);
      res.predictor_corr(a, b) = res.predictor_corr(b, a) = c.r;
    }
    for (std::size_t j = 0; j < t.target_names.size(); ++j) {
      const auto c = stats::pearson(cols[a], t.targets.column(j));
      res.target_corr(a, j) = c.r;
    }
    res.degenerate[a] = stats::pearson(cols[a], cols[a]).degenerate;
    if (res.degenerate[a]) res.predictor_corr(a, a) = 0.0;
  }
  std::vector<int> group_of(p, -1);
  for (std::size_t s = 0; s < p; ++s) {
    if (group_of[s] >= 0) continue;
    std::vector<std::size_t> members;
    std::vector<std::size_t> stack{s};
    group_of[s] = static_cast<int>(res.groups.size());
    while (!stack.empty()) {
      const std::size_t a = stack.back();
      stack.pop_back();
      members.push_back(a);
      for (std::size_t b = 0; b < p; ++b) {
        if (group_of[b] < 0 && b != a && std::abs(res.predictor_corr(a, b)) > threshold) {
          group_of[b] = group_of[s];
          stack.push_back(b);
        }
      }
    }
    std::sort(members.begin(), members.end());
    res.groups.push_back(std::move(members));
  }
  std::vector<std::size_t> keep;
  for (const auto& g : res.groups) {
    std::optional<std::size_t> best;
    for (std::size_t c : g) {
      if (res.degenerate[c]) continue;
      if (!best || std::abs(res.target_corr(c, target_index)) >
                       std::abs(res.target_corr(*best, target_index))) {
        best = c;
      }
    }
    if (best) keep.push_back(*best);
  }
  std::sort(keep.begin(), keep.end());
  for (std::size_t c : keep) res.selected.push_back(t.predictor_names[c]);
  return res;
}

inline std::string format_feature_csv(const FeatureTable& t) {
  csv::Table out;
  out.header.push_back("transcript_id");
  out.header.insert(out.header.end(), t.predictor_names.begin(), t.predictor_names.end());
  out.header.insert(out.header.end(), t.target_names.begin(), t.target_names.end());
  for (std::size_t r = 0; r < t.rows(); ++r) {
    std::vector<std::string> row{t.ids[r]};
    for (std::size_t c = 0; c < t.num_predictors(); ++c) row.push_back(text::format_double(t.predictors(r, c)));
    for (std::size_t c = 0; c < t.target_names.size(); ++c) row.push_back(text::format_double(t.targets(r, c)));
    out.rows.push_back(std::move(row));
  }
  return csv::format(out);
}

inline ColumnGroup group_of_column(std::string_view name) {
  if (name == "age" || name == "sex") return ColumnGroup::kDemographic;
  if (parse_emotion(name)) return ColumnGroup::kEmotion;
  return ColumnGroup::kNetwork;
}

// Inverse of format_feature_csv. Columns named in `target_names` are
// targets; every other column except transcript_id is a predictor.
inline FeatureTable parse_feature_csv(std::string_view content,
                                      const std::vector<std::string>& target_names,
                                      const std::string& source = "<features>") {
  const auto table = csv::parse(content, source);
  FeatureTable t;
  std::vector<std::size_t> pred_cols;
  std::vector<std::size_t> target_cols;
  for (std::size_t c = 1; c < table.header.size(); ++c) {
    const auto& name = table.header[c];
    if (std::find(target_names.begin(), target_names.end(), name) != target_names.end()) {
      t.target_names.push_back(name);
      target_cols.push_back(c);
    } else {
      t.predictor_names.push_back(name);
      t.predictor_groups.push_back(group_of_column(name));
      pred_cols.push_back(c);
    }
  }
  t.predictors = Matrix(table.rows.size(), pred_cols.size());
  t.targets = Matrix(table.rows.size(), target_cols.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    t.ids.push_back(row[0]);
    const auto value = [&](std::size_t c) {
      auto v = text::parse_double(row[c]);
      if (!v) {
        throw Error(ErrorKind::kMalformedLine,
                    source + ": non-numeric value in column " + table.header[c]);
      }
      return *v;
    };
    for (std::size_t j = 0; j < pred_cols.size(); ++j) t.predictors(r, j) = value(pred_cols[j]);
    for (std::size_t j = 0; j < target_cols.size(); ++j) t.targets(r, j) = value(target_cols[j]);
  }
  return t;
}

inline nlohmann::json scaling_manifest(const FeatureTable& t) {
  nlohmann::json cols = nlohmann::json::array();
  for (const auto& rec : t.scaling) {
    cols.push_back({{"column", rec.column},
                    {"min", rec.min},
                    {"max", rec.max},
                    {"lo", rec.lo},
                    {"hi", rec.hi},
                    {"constant", rec.constant}});
  }
  return {{"method", "minmax"}, {"columns", cols}};
}

inline std::string format_correlation_csv(const ScreenResult& s,
                                          const std::vector<std::string>& names) {
  csv::Table out;
  out.header.push_back("feature");
  out.header.insert(out.header.end(), names.begin(), names.end());
  for (std::size_t a = 0; a < names.size(); ++a) {
    std::vector<std::string> row{names[a]};
    for (std::size_t b = 0; b < names.size(); ++b) row.push_back(text::format_double(s.predictor_corr(a, b)));
    out.rows.push_back(std::move(row));
  }
  return csv::format(out);
}

// Feature-by-target r table with |r| <= threshold left blank.
inline std::string format_feature_target_csv(const ScreenResult& s, const FeatureTable& t,
                                             double blank_below = 0.10) {
  csv::Table out;
  out.header.push_back("feature");
  out.header.insert(out.header.end(), t.target_names.begin(), t.target_names.end());
  for (std::size_t a = 0; a < t.num_predictors(); ++a) {
    std::vector<std::string> row{t.predictor_names[a]};
    bool any = false;
    for (std::size_t j = 0; j < t.target_names.size(); ++j) {
      const double r = s.target_corr(a, j);
      if (std::abs(r) > blank_below) {
        row.push_back(text::format_fixed(r, 2));
        any = true;
      } else {
        row.emplace_back();
      }
    }
    if (any) out.rows.push_back(std::move(row));
  }
  return csv::format(out);
}

}  // namespace tfmn

#endif  // TFMN_FEATURES_HPP_
