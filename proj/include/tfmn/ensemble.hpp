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

#ifndef TFMN_ENSEMBLE_HPP_
#define TFMN_ENSEMBLE_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "tfmn/error.hpp"
#include "tfmn/matrix.hpp"
#include "tfmn/rng.hpp"
#include "tfmn/stats.hpp"
#include "tfmn/tree.hpp"

namespace tfmn {

enum class ModelKind { kRfr, kGbm };
enum class Loss { kSquaredError, kAbsoluteError };

inline std::string_view to_string(ModelKind k) { return k == ModelKind::kRfr ? "rfr" : "gbm"; }
inline std::string_view to_string(Loss l) {
  return l == Loss::kSquaredError ? "squared_error" : "absolute_error";
}

inline std::optional<ModelKind> parse_model_kind(std::string_view s) {
  if (s == "rfr" || s == "RFR") return ModelKind::kRfr;
  if (s == "gbm" || s == "GBM") return ModelKind::kGbm;
  return std::nullopt;
}
inline std::optional<Loss> parse_loss(std::string_view s) {
  if (s == "squared_error" || s == "squared") return Loss::kSquaredError;
  if (s == "absolute_error" || s == "absolute") return Loss::kAbsoluteError;
  return std::nullopt;
}
inline std::optional<Criterion> parse_criterion(std::string_view s) {
  if (s == "squared_error") return Criterion::kSquaredError;
  if (s == "friedman_mse") return Criterion::kFriedmanMse;
  return std::nullopt;
}
inline std::optional<MaxFeatures> parse_max_features(std::string_view s) {
  if (s == "none" || s == "all" || s == "None") return MaxFeatures::kAll;
  if (s == "sqrt") return MaxFeatures::kSqrt;
  if (s == "log2") return MaxFeatures::kLog2;
  return std::nullopt;
}

struct EnsembleConfig {
  ModelKind kind = ModelKind::kRfr;
  int n_estimators = 100;
  int max_depth = -1;  // -1: unlimited
  MaxFeatures max_features = MaxFeatures::kAll;
  // GBM only.
  double learning_rate = 0.1;
  double subsample = 1.0;
  Loss loss = Loss::kSquaredError;
  // RFR only.
  int max_leaf_nodes = -1;  // -1: unlimited
  Criterion criterion = Criterion::kSquaredError;
  std::uint64_t seed = 0;

  friend bool operator==(const EnsembleConfig&, const EnsembleConfig&) = default;
};

inline void validate(const EnsembleConfig& c) {
  if (c.n_estimators < 1) throw Error(ErrorKind::kInvalidArgument, "n_estimators must be >= 1");
  if (c.max_depth < -1 || c.max_depth == 0) {
    throw Error(ErrorKind::kInvalidArgument, "max_depth must be positive or unlimited");
  }
  if (c.kind == ModelKind::kGbm) {
    if (!(c.learning_rate >= 0) || !std::isfinite(c.learning_rate)) {
      throw Error(ErrorKind::kInvalidArgument, "learning_rate must be finite and >= 0");
    }
    if (!(c.subsample > 0 && c.subsample <= 1)) {
      throw Error(ErrorKind::kInvalidArgument, "subsample must lie in (0, 1]");
    }
  } else if (c.max_leaf_nodes != -1 && c.max_leaf_nodes < 2) {
    throw Error(ErrorKind::kInvalidArgument, "max_leaf_nodes must be >= 2 or unlimited");
  }
}

inline std::string describe(const EnsembleConfig& c) {
  const auto opt = [](int v) { return v < 0 ? std::string("None") : std::to_string(v); };
  std::string s(to_string(c.kind));
  s += " n_estimators=" + std::to_string(c.n_estimators);
  s += " max_depth=" + opt(c.max_depth);
  s += " max_features=" + std::string(to_string(c.max_features));
  if (c.kind == ModelKind::kGbm) {
    nlohmann::json lr = c.learning_rate;
    nlohmann::json ss = c.subsample;
    s += " learning_rate=" + lr.dump();
    s += " subsample=" + ss.dump();
    s += " loss=" + std::string(to_string(c.loss));
  } else {
    s += " max_leaf_nodes=" + opt(c.max_leaf_nodes);
    s += " criterion=" + std::string(to_string(c.criterion));
  }
  return s;
}

inline nlohmann::json to_json(const EnsembleConfig& c) {
  nlohmann::json j;
  j["kind"] = std::string(to_string(c.kind));
  j["n_estimators"] = c.n_estimators;
  j["max_depth"] = c.max_depth < 0 ? nlohmann::json() : nlohmann::json(c.max_depth);
  j["max_features"] = std::string(to_string(c.max_features));
  if (c.kind == ModelKind::kGbm) {
    j["learning_rate"] = c.learning_rate;
    j["subsample"] = c.subsample;
    j["loss"] = std::string(to_string(c.loss));
  } else {
    j["max_leaf_nodes"] = c.max_leaf_nodes < 0 ? nlohmann::json() : nlohmann::json(c.max_leaf_nodes);
    j["criterion"] = std::string(to_string(c.criterion));
  }
  j["seed"] = c.seed;
  return j;
}

inline EnsembleConfig config_from_json(const nlohmann::json& j) {
  EnsembleConfig c;
  const auto bad = [](std::string_view what) {
    return Error(ErrorKind::kSchemaMismatch, "bad ensemble config field: " + std::string(what));
  };
  try {
    auto kind = parse_model_kind(j.at("kind").get<std::string>());
    if (!kind) throw bad("kind");
    c.kind = *kind;
    c.n_estimators = j.at("n_estimators").get<int>();
    c.max_depth = j.at("max_depth").is_null() ? -1 : j.at("max_depth").get<int>();
    auto mf = parse_max_features(j.at("max_features").get<std::string>());
    if (!mf) throw bad("max_features");
    c.max_features = *mf;
    if (c.kind == ModelKind::kGbm) {
      c.learning_rate = j.at("learning_rate").get<double>();
      c.subsample = j.at("subsample").get<double>();
      auto loss = parse_loss(j.at("loss").get<std::string>());
      if (!loss) throw bad("loss");
      c.loss = *loss;
    } else {
      c.max_leaf_nodes = j.at("max_leaf_nodes").is_null() ? -1 : j.at("max_leaf_nodes").get<int>();
      auto crit = parse_criterion(j.at("criterion").get<std::string>());
      if (!crit) throw bad("criterion");
      c.criterion = *crit;
    }
    c.seed = j.at("seed").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kSchemaMismatch, std::string("ensemble config: ") + e.what());
  }
  return c;
}

struct TrainedEnsemble {
  EnsembleConfig config;
  std::vector<std::string> feature_names;
  double init = 0;  // GBM base value; 0 for RFR
  std::vector<RegressionTree> trees;

  std::size_t num_features() const { return feature_names.size(); }

  // Multiplier applied to tree t when the first n trees are used.
  double tree_weight(std::size_t n) const {
    return config.kind == ModelKind::kGbm ? config.learning_rate : 1.0 / static_cast<double>(n);
  }

  // Prediction using only the first n trees (GBM stages / RFR members).
  double predict_prefix(std::span<const double> x, std::size_t n) const {
    n = std::min(n, trees.size());
    double sum = 0;
    for (std::size_t t = 0; t < n; ++t) sum += trees[t].predict(x);
    if (config.kind == ModelKind::kGbm) return init + config.learning_rate * sum;
    return sum / static_cast<double>(n);
  }

  double predict(std::span<const double> x) const {
    if (x.size() != num_features()) {
      throw Error(ErrorKind::kSchemaMismatch, "row has " + std::to_string(x.size()) +
                                                  " features, model expects " +
                                                  std::to_string(num_features()));
    }
    return predict_prefix(x, trees.size());
  }

  std::vector<double> predict(const Matrix& x) const {
    if (x.cols() != num_features()) {
      throw Error(ErrorKind::kSchemaMismatch, "matrix has " + std::to_string(x.cols()) +
                                                  " columns, model expects " +
                                                  std::to_string(num_features()));
    }
    std::vector<double> out(x.rows());
    for (std::size_t r = 0; r < x.rows(); ++r) out[r] = predict_prefix(x.row(r), trees.size());
    return out;
  }

  // out[i][r]: prediction for row r using the first counts[i] trees.
  std::vector<std::vector<double>> staged_predict(const Matrix& x,
                                                  std::span<const std::size_t> counts) const {
    std::vector<std::vector<double>> out(counts.size(), std::vector<double>(x.rows()));
    for (std::size_t r = 0; r < x.rows(); ++r) {
      double sum = 0;
      std::size_t t = 0;
      for (std::size_t i = 0; i < counts.size(); ++i) {
        const std::size_t n = std::min(counts[i], trees.size());
        for (; t < n; ++t) sum += trees[t].predict(x.row(r));
        out[i][r] = config.kind == ModelKind::kGbm ? init + config.learning_rate * sum
                                                   : sum / static_cast<double>(n);
      }
    }
    return out;
  }
};

inline std::vector<std::string> default_feature_names(std::size_t n) {
  std::vector<std::string> names(n);
  for (std::size_t i = 0; i < n; ++i) names[i] = "x" + std::to_string(i);
  return names;
}

namespace detail {

inline void check_training_data(const Matrix& x, std::span<const double> y,
                                const std::vector<std::string>& names) {
  if (x.rows() < 2) throw Error(ErrorKind::kInvalidArgument, "need at least two rows");
  if (x.rows() != y.size()) throw Error(ErrorKind::kInvalidArgument, "X and y row counts differ");
  if (!names.empty() && names.size() != x.cols()) {
    throw Error(ErrorKind::kSchemaMismatch, "feature name count differs from column count");
  }
  for (double v : x.data()) {
    if (!std::isfinite(v)) throw Error(ErrorKind::kInvalidArgument, "X contains a non-finite value");
  }
}

}  // namespace detail

// Random forest: bootstrap sample per tree, prediction is the mean of trees.
inline TrainedEnsemble fit_rfr(const Matrix& x, std::span<const double> y, const EnsembleConfig& cfg,
                               std::vector<std::string> names = {},
                               const SortedColumns* presorted = nullptr) {
  if (cfg.kind != ModelKind::kRfr) throw Error(ErrorKind::kInvalidArgument, "config is not RFR");
  validate(cfg);
  detail::check_training_data(x, y, names);
  std::optional<SortedColumns> own;
  if (!presorted) presorted = &own.emplace(x);
  TrainedEnsemble model;
  model.config = cfg;
  model.feature_names = names.empty() ? default_feature_names(x.cols()) : std::move(names);
  TreeParams params;
  params.max_depth = cfg.max_depth;
  params.max_features = cfg.max_features;
  params.max_leaf_nodes = cfg.max_leaf_nodes;
  params.criterion = cfg.criterion;
  const std::size_t n = x.rows();
  std::vector<double> w(n);
  model.trees.reserve(static_cast<std::size_t>(cfg.n_estimators));
  for (int t = 0; t < cfg.n_estimators; ++t) {
    std::fill(w.begin(), w.end(), 0.0);
    Rng boot(derive_seed(cfg.seed, "rfr-bootstrap", static_cast<std::uint64_t>(t)));
    for (std::size_t i = 0; i < n; ++i) w[boot.uniform_index(n)] += 1.0;
    model.trees.push_back(fit_tree(x, y, w, params,
                                   derive_seed(cfg.seed, "rfr-tree", static_cast<std::uint64_t>(t)),
                                   presorted));
  }
  return model;
}

// Gradient boosting: stagewise trees on the negative loss gradient. Squared
// loss fits residuals; absolute loss fits residual signs and then resets each
// leaf to the median residual of its in-sample rows.
inline TrainedEnsemble fit_gbm(const Matrix& x, std::span<const double> y, const EnsembleConfig& cfg,
                               std::vector<std::string> names = {},
                               const SortedColumns* presorted = nullptr) {
  if (cfg.kind != ModelKind::kGbm) throw Error(ErrorKind::kInvalidArgument, "config is not GBM");
  validate(cfg);
  detail::check_training_data(x, y, names);
  std::optional<SortedColumns> own;
  if (!presorted) presorted = &own.emplace(x);
  TrainedEnsemble model;
  model.config = cfg;
  model.feature_names = names.empty() ? default_feature_names(x.cols()) : std::move(names);
  const std::size_t n = x.rows();
  const std::vector<double> yv(y.begin(), y.end());
  model.init = cfg.loss == Loss::kSquaredError ? stats::mean(yv) : stats::median(yv);

  TreeParams params;
  params.max_depth = cfg.max_depth;
  params.max_features = cfg.max_features;
  params.criterion = Criterion::kFriedmanMse;
  const std::size_t n_inbag =
      std::max<std::size_t>(1, static_cast<std::size_t>(cfg.subsample * static_cast<double>(n)));

  std::vector<double> f(n, model.init);
  std::vector<double> grad(n);
  std::vector<double> w(n, 1.0);
  std::vector<std::size_t> perm(n);
  std::vector<int> leaf_of(n);
  model.trees.reserve(static_cast<std::size_t>(cfg.n_estimators));
  for (int t = 0; t < cfg.n_estimators; ++t) {
    if (n_inbag < n) {
      std::fill(w.begin(), w.end(), 0.0);
      for (std::size_t i = 0; i < n; ++i) perm[i] = i;
      Rng sub(derive_seed(cfg.seed, "gbm-subsample", static_cast<std::uint64_t>(t)));
      for (std::size_t i = 0; i < n_inbag; ++i) {
        std::swap(perm[i], perm[i + sub.uniform_index(n - i)]);
        w[perm[i]] = 1.0;
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      const double resid = y[i] - f[i];
      grad[i] = cfg.loss == Loss::kSquaredError ? resid : (resid > 0 ? 1.0 : -1.0);
    }
    RegressionTree tree = fit_tree(x, grad, w, params,
                                   derive_seed(cfg.seed, "gbm-tree", static_cast<std::uint64_t>(t)),
                                   presorted);
    for (std::size_t i = 0; i < n; ++i) leaf_of[i] = tree.leaf_index(x.row(i));
    if (cfg.loss == Loss::kAbsoluteError) {
      std::vector<std::vector<double>> resid(tree.nodes.size());
      for (std::size_t i = 0; i < n; ++i) {
        if (w[i] > 0) resid[static_cast<std::size_t>(leaf_of[i])].push_back(y[i] - f[i]);
      }
      for (std::size_t k = 0; k < tree.nodes.size(); ++k) {
        if (tree.nodes[k].is_leaf()) tree.nodes[k].value = stats::median(std::move(resid[k]));
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      f[i] += cfg.learning_rate * tree.nodes[static_cast<std::size_t>(leaf_of[i])].value;
    }
    model.trees.push_back(std::move(tree));
  }
  return model;
}

inline TrainedEnsemble fit_ensemble(const Matrix& x, std::span<const double> y,
                                    const EnsembleConfig& cfg, std::vector<std::string> names = {},
                                    const SortedColumns* presorted = nullptr) {
  return cfg.kind == ModelKind::kRfr ? fit_rfr(x, y, cfg, std::move(names), presorted)
                                     : fit_gbm(x, y, cfg, std::move(names), presorted);
}

inline constexpr std::string_view kModelFormat = "tfmn-ensemble";
inline constexpr int kModelFormatVersion = 1;

namespace detail {

inline nlohmann::json node_to_json(const RegressionTree& t, int i) {
  const auto& n = t.nodes[static_cast<std::size_t>(i)];
  nlohmann::json j;
  j["value"] = n.value;
  j["cover"] = n.cover;
  if (!n.is_leaf()) {
    j["feature"] = n.feature;
    j["threshold"] = n.threshold;
    j["left"] = node_to_json(t, n.left);
    j["right"] = node_to_json(t, n.right);
  }
  return j;
}

inline int node_from_json(const nlohmann::json& j, int depth, RegressionTree& t) {
  const int index = static_cast<int>(t.nodes.size());
  t.nodes.emplace_back();
  TreeNode n;
  n.value = j.at("value").get<double>();
  n.cover = j.at("cover").get<double>();
  n.depth = depth;
  if (j.contains("feature")) {
    n.feature = j.at("feature").get<int>();
    n.threshold = j.at("threshold").get<double>();
    n.left = node_from_json(j.at("left"), depth + 1, t);
    n.right = node_from_json(j.at("right"), depth + 1, t);
  }
  t.nodes[static_cast<std::size_t>(index)] = n;
  return index;
}

}  // namespace detail

inline nlohmann::json to_json(const TrainedEnsemble& m) {
  nlohmann::json j;
  j["format"] = std::string(kModelFormat);
  j["version"] = kModelFormatVersion;
  j["config"] = to_json(m.config);
  j["feature_names"] = m.feature_names;
  j["init"] = m.init;
  j["trees"] = nlohmann::json::array();
  for (const auto& t : m.trees) j["trees"].push_back(detail::node_to_json(t, 0));
  return j;
}

// Node order after loading is pre-order, which may differ from the order a
// fit produced; predictions and covers are unaffected.
inline TrainedEnsemble ensemble_from_json(const nlohmann::json& j) {
  try {
    if (j.at("format").get<std::string>() != kModelFormat) {
      throw Error(ErrorKind::kSchemaMismatch, "not a tfmn ensemble document");
    }
    if (j.at("version").get<int>() != kModelFormatVersion) {
      throw Error(ErrorKind::kSchemaMismatch, "unsupported ensemble format version");
    }
    TrainedEnsemble m;
    m.config = config_from_json(j.at("config"));
    m.feature_names = j.at("feature_names").get<std::vector<std::string>>();
    m.init = j.at("init").get<double>();
    for (const auto& tj : j.at("trees")) {
      RegressionTree t;
      detail::node_from_json(tj, 0, t);
      for (const auto& n : t.nodes) {
        if (!n.is_leaf() && (n.feature < 0 || static_cast<std::size_t>(n.feature) >= m.num_features())) {
          throw Error(ErrorKind::kSchemaMismatch, "tree splits on an unknown feature");
        }
      }
      m.trees.push_back(std::move(t));
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kSchemaMismatch, std::string("ensemble document: ") + e.what());
  }
}

}  // namespace tfmn

#endif  // TFMN_ENSEMBLE_HPP_
