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

#ifndef TFMN_CONFIG_HPP_
#define TFMN_CONFIG_HPP_

#include <unistd.h>

#include <cctype>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <type_traits>
#include <utility>
#include <vector>

#define TOML_EXCEPTIONS 1
#include "json.hpp"
#include "toml.hpp"

#include "tfmn/cv.hpp"
#include "tfmn/emotions.hpp"
#include "tfmn/ensemble.hpp"
#include "tfmn/error.hpp"
#include "tfmn/features.hpp"
#include "tfmn/metrics.hpp"
#include "tfmn/network.hpp"
#include "tfmn/shap.hpp"
#include "tfmn/text.hpp"

namespace tfmn {

inline constexpr std::string_view kEnvPrefix = "TFMN_";

enum class ExplainModel { kBest, kRfr, kGbm };

struct PipelineConfig {
  std::optional<std::uint64_t> seed;

  struct Paths {
    std::filesystem::path corpus;  // a .conllu file or a directory of them
    std::filesystem::path stopwords;
    std::filesystem::path emotion_lexicon;
    std::filesystem::path valence_lexicon;  // optional; EmoLex polarity rows otherwise
    std::filesystem::path synonyms;         // optional
    std::filesystem::path targets;
    std::filesystem::path demographics;     // optional; CoNLL-U comments otherwise
    std::filesystem::path output;
  } paths;

  struct Network {
    int k = kDefaultSyntacticDistance;
    SynonymScope synonym_scope = SynonymScope::kPresent;
    bool synonym_edges_in_metrics = true;
    metrics::CommunityMethod community = metrics::CommunityMethod::kGreedy;
  } network;

  struct Emotions {
    int samples = kDefaultNullSamples;
    Sampling sampling = Sampling::kWithoutReplacement;
  } emotions;

  struct Features {
    bool screen = true;
    double correlation_threshold = 0.1;
    double collinearity_threshold = 0.8;
    double train_lo = 0.0;
    double train_hi = 1.0;
    double shap_lo = -5.0;
    double shap_hi = 5.0;
  } features;

  struct Models {
    std::size_t folds = kDefaultFolds;
    std::vector<std::string> targets{kTargetColumns.begin(), kTargetColumns.end()};
    std::vector<FeatureSubset> subsets{FeatureSubset::kCombined, FeatureSubset::kNetwork,
                                       FeatureSubset::kEmotion};
    std::vector<ModelKind> kinds{ModelKind::kRfr, ModelKind::kGbm};
    std::size_t n_perm = 1;
    GbmGrid gbm;
    RfrGrid rfr;
  } models;

  struct Explain {
    bool enabled = true;
    ExplainModel model = ExplainModel::kBest;
    FeatureSubset subset = FeatureSubset::kCombined;
    double delta = kDefaultEliminationDelta;
    std::size_t n_shuffles = 1;
  } explain;
};

namespace detail {

[[noreturn]] inline void config_error(const std::string& msg) { throw Error(ErrorKind::kConfig, msg); }

inline std::string key_name(std::string_view section, std::string_view key) {
  return section.empty() ? std::string(key) : std::string(section) + "." + std::string(key);
}

// Every accepted key, as section and key. Environment overrides are derived
// from this list: section "models.gbm", key "n_estimators" becomes
// TFMN_MODELS_GBM_N_ESTIMATORS.
inline const std::vector<std::pair<std::string, std::string>>& known_keys() {
  static const std::vector<std::pair<std::string, std::string>> keys = {
      {"", "seed"},
      {"paths", "corpus"},
      {"paths", "stopwords"},
      {"paths", "emotion_lexicon"},
      {"paths", "valence_lexicon"},
      {"paths", "synonyms"},
      {"paths", "targets"},
      {"paths", "demographics"},
      {"paths", "output"},
      {"network", "k"},
      {"network", "synonym_scope"},
      {"network", "synonym_edges_in_metrics"},
      {"network", "community"},
      {"emotions", "samples"},
      {"emotions", "sampling"},
      {"features", "screen"},
      {"features", "correlation_threshold"},
      {"features", "collinearity_threshold"},
      {"features", "train_range"},
      {"features", "shap_range"},
      {"models", "folds"},
      {"models", "targets"},
      {"models", "subsets"},
      {"models", "kinds"},
      {"models", "n_perm"},
      {"models.gbm", "n_estimators"},
      {"models.gbm", "learning_rate"},
      {"models.gbm", "max_depth"},
      {"models.gbm", "max_features"},
      {"models.gbm", "subsample"},
      {"models.gbm", "loss"},
      {"models.rfr", "n_estimators"},
      {"models.rfr", "max_depth"},
      {"models.rfr", "max_features"},
      {"models.rfr", "max_leaf_nodes"},
      {"models.rfr", "criterion"},
      {"explain", "enabled"},
      {"explain", "model"},
      {"explain", "subset"},
      {"explain", "delta"},
      {"explain", "n_shuffles"},
  };
  return keys;
}

inline std::string env_name(std::string_view section, std::string_view key) {
  std::string out(kEnvPrefix);
  for (char c : key_name(section, key)) {
    out += c == '.' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  }
  return out;
}

inline toml::table* section_table(toml::table& root, std::string_view section, bool create) {
  toml::table* t = &root;
  if (section.empty()) return t;
  for (const auto& part : text::split(section, '.')) {
    toml::node* n = t->get(part);
    if (!n) {
      if (!create) return nullptr;
      n = &t->insert_or_assign(part, toml::table{}).first->second;
    }
    t = n->as_table();
    if (!t) config_error("'" + part + "' must be a table");
  }
  return t;
}

// Unknown sections and keys are rejected so that typos surface.
inline void check_keys(const toml::table& t, const std::string& prefix) {
  for (const auto& [k, v] : t) {
    const std::string key(k.str());
    const std::string full = prefix.empty() ? key : prefix + "." + key;
    if (const auto* sub = v.as_table()) {
      bool is_section = false;
      for (const auto& [s, _] : known_keys()) {
        if (s == full || text::starts_with(s, full + ".")) is_section = true;
      }
      if (!is_section) config_error("unknown section [" + full + "]");
      check_keys(*sub, full);
      continue;
    }
    bool known = false;
    for (const auto& [s, name] : known_keys()) {
      if (s == prefix && name == key) known = true;
    }
    if (!known) config_error("unknown key '" + full + "'");
  }
}

// Values from the environment are read as TOML literals; anything that does
// not parse as one is taken as a bare string.
inline void apply_env(toml::table& root, const std::map<std::string, std::string>& env) {
  for (const auto& [section, key] : known_keys()) {
    const auto it = env.find(env_name(section, key));
    if (it == env.end()) continue;
    toml::table parsed;
    try {
      parsed = toml::parse("v = " + it->second);
    } catch (const toml::parse_error&) {
      parsed.insert_or_assign("v", it->second);
    }
    section_table(root, section, true)->insert_or_assign(key, *parsed.get("v"));
  }
  for (const auto& [name, value] : env) {
    if (!text::starts_with(name, kEnvPrefix)) continue;
    bool known = false;
    for (const auto& [section, key] : known_keys()) known = known || env_name(section, key) == name;
    if (!known) config_error("unknown environment override " + name);
  }
}

class Reader {
 public:
  Reader(const toml::table& root, std::filesystem::path base) : root_(root), base_(std::move(base)) {}

  const toml::node* find(std::string_view section, std::string_view key) const {
    const toml::table* t = &root_;
    if (!section.empty()) {
      for (const auto& part : text::split(section, '.')) {
        const toml::node* n = t->get(part);
        if (!n || !n->is_table()) return nullptr;
        t = n->as_table();
      }
    }
    return t->get(key);
  }

  template <typename T>
  void number(std::string_view section, std::string_view key, T& out) const {
    const toml::node* n = find(section, key);
    if (!n) return;
    if constexpr (std::is_floating_point_v<T>) {
      if (auto v = n->value<double>()) {
        out = static_cast<T>(*v);
        return;
      }
    } else if (auto v = n->value<std::int64_t>()) {
      if (*v < 0 && std::is_unsigned_v<T>) bad(section, key, "must be non-negative");
      out = static_cast<T>(*v);
      return;
    }
    bad(section, key, "must be a number");
  }

  void boolean(std::string_view section, std::string_view key, bool& out) const {
    const toml::node* n = find(section, key);
    if (!n) return;
    if (auto v = n->value<bool>()) {
      out = *v;
      return;
    }
    bad(section, key, "must be true or false");
  }

  std::optional<std::string> string(std::string_view section, std::string_view key) const {
    const toml::node* n = find(section, key);
    if (!n) return std::nullopt;
    if (auto v = n->value<std::string>()) return *v;
    bad(section, key, "must be a string");
  }

  void path(std::string_view section, std::string_view key, std::filesystem::path& out) const {
    if (auto s = string(section, key)) {
      out = s->empty() ? std::filesystem::path() : (base_ / *s).lexically_normal();
    }
  }

  template <typename F>
  void choice(std::string_view section, std::string_view key, F parse) const {
    if (auto s = string(section, key)) {
      if (!parse(*s)) bad(section, key, "unrecognised value '" + *s + "'");
    }
  }

  // Arrays of scalars. `item` converts one element or returns false.
  template <typename T, typename F>
  void list(std::string_view section, std::string_view key, std::vector<T>& out, F item) const {
    const toml::node* n = find(section, key);
    if (!n) return;
    const toml::array* arr = n->as_array();
    if (!arr) bad(section, key, "must be an array");
    std::vector<T> values;
    for (const auto& el : *arr) {
      T v{};
      if (!item(el, v)) bad(section, key, "has an invalid element");
      values.push_back(v);
    }
    out = std::move(values);
  }

  [[noreturn]] static void bad(std::string_view section, std::string_view key, const std::string& why) {
    config_error("'" + key_name(section, key) + "' " + why);
  }

 private:
  const toml::table& root_;
  std::filesystem::path base_;
};

inline bool depth_item(const toml::node& n, int& out) {
  if (auto v = n.value<std::int64_t>()) {
    out = static_cast<int>(*v);
    return *v >= 1;
  }
  if (auto s = n.value<std::string>()) {
    out = -1;
    return *s == "none" || *s == "None";
  }
  return false;
}

inline bool int_item(const toml::node& n, int& out) {
  auto v = n.value<std::int64_t>();
  if (!v) return false;
  out = static_cast<int>(*v);
  return true;
}

inline bool double_item(const toml::node& n, double& out) {
  auto v = n.value<double>();
  if (!v) return false;
  out = *v;
  return true;
}

template <typename T, typename F>
auto parsed_item(F parse) {
  return [parse](const toml::node& n, T& out) {
    auto s = n.value<std::string>();
    if (!s) return false;
    auto v = parse(*s);
    if (!v) return false;
    out = *v;
    return true;
  };
}

inline std::optional<SynonymScope> parse_synonym_scope(std::string_view s) {
  if (s == "present") return SynonymScope::kPresent;
  if (s == "adjacent") return SynonymScope::kAdjacent;
  return std::nullopt;
}

inline std::optional<metrics::CommunityMethod> parse_community(std::string_view s) {
  if (s == "greedy") return metrics::CommunityMethod::kGreedy;
  if (s == "louvain") return metrics::CommunityMethod::kLouvain;
  return std::nullopt;
}

inline std::optional<Sampling> parse_sampling(std::string_view s) {
  if (s == "without_replacement") return Sampling::kWithoutReplacement;
  if (s == "with_replacement") return Sampling::kWithReplacement;
  return std::nullopt;
}

inline std::optional<ExplainModel> parse_explain_model(std::string_view s) {
  if (s == "best") return ExplainModel::kBest;
  if (s == "rfr") return ExplainModel::kRfr;
  if (s == "gbm") return ExplainModel::kGbm;
  return std::nullopt;
}

}  // namespace detail

inline std::string_view to_string(SynonymScope s) { return s == SynonymScope::kPresent ? "present" : "adjacent"; }
inline std::string_view to_string(metrics::CommunityMethod m) {
  return m == metrics::CommunityMethod::kGreedy ? "greedy" : "louvain";
}
inline std::string_view to_string(Sampling s) {
  return s == Sampling::kWithoutReplacement ? "without_replacement" : "with_replacement";
}
inline std::string_view to_string(ExplainModel m) {
  return m == ExplainModel::kBest ? "best" : m == ExplainModel::kRfr ? "rfr" : "gbm";
}

// Reads a TOML document. Relative paths resolve against `base_dir`; `env`
// holds TFMN_* overrides applied on top of the file.
inline PipelineConfig parse_config(std::string_view content, const std::filesystem::path& base_dir,
                                   const std::map<std::string, std::string>& env = {}) {
  toml::table root;
  try {
    root = toml::parse(content);
  } catch (const toml::parse_error& e) {
    detail::config_error(std::string("TOML syntax error at line ") +
                         std::to_string(e.source().begin.line) + ": " + std::string(e.description()));
  }
  detail::check_keys(root, "");
  detail::apply_env(root, env);

  PipelineConfig c;
  const detail::Reader r(root, base_dir);
  if (r.find("", "seed")) {
    std::uint64_t seed = 0;
    r.number("", "seed", seed);
    c.seed = seed;
  }
  r.path("paths", "corpus", c.paths.corpus);
  r.path("paths", "stopwords", c.paths.stopwords);
  r.path("paths", "emotion_lexicon", c.paths.emotion_lexicon);
  r.path("paths", "valence_lexicon", c.paths.valence_lexicon);
  r.path("paths", "synonyms", c.paths.synonyms);
  r.path("paths", "targets", c.paths.targets);
  r.path("paths", "demographics", c.paths.demographics);
  r.path("paths", "output", c.paths.output);

  r.number("network", "k", c.network.k);
  r.choice("network", "synonym_scope", [&](const std::string& s) {
    auto v = detail::parse_synonym_scope(s);
    if (v) c.network.synonym_scope = *v;
    return v.has_value();
  });
  r.boolean("network", "synonym_edges_in_metrics", c.network.synonym_edges_in_metrics);
  r.choice("network", "community", [&](const std::string& s) {
    auto v = detail::parse_community(s);
    if (v) c.network.community = *v;
    return v.has_value();
  });

  r.number("emotions", "samples", c.emotions.samples);
  r.choice("emotions", "sampling", [&](const std::string& s) {
    auto v = detail::parse_sampling(s);
    if (v) c.emotions.sampling = *v;
    return v.has_value();
  });

  r.boolean("features", "screen", c.features.screen);
  r.number("features", "correlation_threshold", c.features.correlation_threshold);
  r.number("features", "collinearity_threshold", c.features.collinearity_threshold);
  std::vector<double> range;
  r.list("features", "train_range", range, detail::double_item);
  if (!range.empty()) {
    if (range.size() != 2) detail::Reader::bad("features", "train_range", "must hold two numbers");
    c.features.train_lo = range[0];
    c.features.train_hi = range[1];
  }
  range.clear();
  r.list("features", "shap_range", range, detail::double_item);
  if (!range.empty()) {
    if (range.size() != 2) detail::Reader::bad("features", "shap_range", "must hold two numbers");
    c.features.shap_lo = range[0];
    c.features.shap_hi = range[1];
  }

  r.number("models", "folds", c.models.folds);
  r.list("models", "targets", c.models.targets, [](const toml::node& n, std::string& out) {
    auto s = n.value<std::string>();
    if (s) out = *s;
    return s.has_value();
  });
  r.list("models", "subsets", c.models.subsets, detail::parsed_item<FeatureSubset>(parse_subset));
  r.list("models", "kinds", c.models.kinds, detail::parsed_item<ModelKind>(parse_model_kind));
  r.number("models", "n_perm", c.models.n_perm);
  r.list("models.gbm", "n_estimators", c.models.gbm.n_estimators, detail::int_item);
  r.list("models.gbm", "learning_rate", c.models.gbm.learning_rate, detail::double_item);
  r.list("models.gbm", "max_depth", c.models.gbm.max_depth, detail::depth_item);
  r.list("models.gbm", "max_features", c.models.gbm.max_features,
         detail::parsed_item<MaxFeatures>(parse_max_features));
  r.list("models.gbm", "subsample", c.models.gbm.subsample, detail::double_item);
  r.list("models.gbm", "loss", c.models.gbm.loss, detail::parsed_item<Loss>(parse_loss));
  r.list("models.rfr", "n_estimators", c.models.rfr.n_estimators, detail::int_item);
  r.list("models.rfr", "max_depth", c.models.rfr.max_depth, detail::depth_item);
  r.list("models.rfr", "max_features", c.models.rfr.max_features,
         detail::parsed_item<MaxFeatures>(parse_max_features));
  r.list("models.rfr", "max_leaf_nodes", c.models.rfr.max_leaf_nodes, detail::depth_item);
  r.list("models.rfr", "criterion", c.models.rfr.criterion,
         detail::parsed_item<Criterion>(parse_criterion));

  r.boolean("explain", "enabled", c.explain.enabled);
  r.choice("explain", "model", [&](const std::string& s) {
    auto v = detail::parse_explain_model(s);
    if (v) c.explain.model = *v;
    return v.has_value();
  });
  r.choice("explain", "subset", [&](const std::string& s) {
    auto v = parse_subset(s);
    if (v) c.explain.subset = *v;
    return v.has_value();
  });
  r.number("explain", "delta", c.explain.delta);
  r.number("explain", "n_shuffles", c.explain.n_shuffles);
  return c;
}

// TFMN_* variables of the current process, known or not, so that a
// misspelt override is reported rather than ignored.
inline std::map<std::string, std::string> environment_overrides() {
  std::map<std::string, std::string> out;
  for (char** e = environ; e && *e; ++e) {
    const std::string_view entry(*e);
    const auto eq = entry.find('=');
    if (eq == std::string_view::npos || !text::starts_with(entry.substr(0, eq), kEnvPrefix)) continue;
    out[std::string(entry.substr(0, eq))] = std::string(entry.substr(eq + 1));
  }
  return out;
}

inline PipelineConfig load_config(const std::filesystem::path& path,
                                  const std::map<std::string, std::string>& env = {}) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) {
    detail::config_error("config file not found: " + path.string());
  }
  return parse_config(text::read_file(path.string()), path.parent_path(), env);
}

// Range and existence checks. Output need not exist yet.
inline void validate(const PipelineConfig& c, bool check_paths = true) {
  using detail::config_error;
  if (!c.seed) config_error("'seed' is required");
  const auto need_file = [&](const std::filesystem::path& p, const std::string& key, bool optional) {
    if (p.empty()) {
      if (!optional) config_error("'paths." + key + "' is required");
      return;
    }
    std::error_code ec;
    if (check_paths && !std::filesystem::exists(p, ec)) {
      config_error("'paths." + key + "' does not exist: " + p.string());
    }
  };
  need_file(c.paths.corpus, "corpus", false);
  need_file(c.paths.stopwords, "stopwords", false);
  need_file(c.paths.emotion_lexicon, "emotion_lexicon", false);
  need_file(c.paths.valence_lexicon, "valence_lexicon", true);
  need_file(c.paths.synonyms, "synonyms", true);
  need_file(c.paths.targets, "targets", false);
  need_file(c.paths.demographics, "demographics", true);
  if (c.paths.output.empty()) config_error("'paths.output' is required");

  if (c.network.k < 1) config_error("'network.k' must be >= 1");
  if (c.emotions.samples < 100) config_error("'emotions.samples' must be >= 100");
  const auto unit = [&](double v, const std::string& key) {
    if (!(v >= 0 && v <= 1)) config_error("'" + key + "' must lie in [0, 1]");
  };
  unit(c.features.correlation_threshold, "features.correlation_threshold");
  unit(c.features.collinearity_threshold, "features.collinearity_threshold");
  if (!(c.features.train_hi > c.features.train_lo)) config_error("'features.train_range' needs lo < hi");
  if (!(c.features.shap_hi > c.features.shap_lo)) config_error("'features.shap_range' needs lo < hi");

  if (c.models.folds < 2) config_error("'models.folds' must be >= 2");
  if (c.models.targets.empty()) config_error("'models.targets' must not be empty");
  if (c.models.subsets.empty()) config_error("'models.subsets' must not be empty");
  if (c.models.kinds.empty()) config_error("'models.kinds' must not be empty");
  const auto check_grid = [&](const std::vector<EnsembleConfig>& grid, const std::string& name) {
    if (grid.empty()) config_error("'" + name + "' grid is empty");
    for (const auto& g : grid) {
      try {
        validate(g);
      } catch (const Error& e) {
        config_error("'" + name + "' grid: " + e.what());
      }
    }
  };
  check_grid(c.models.gbm.expand(0), "models.gbm");
  check_grid(c.models.rfr.expand(0), "models.rfr");

  if (!(c.explain.delta >= 0)) config_error("'explain.delta' must be >= 0");
  if (c.explain.n_shuffles < 1) config_error("'explain.n_shuffles' must be >= 1");
}

namespace detail {

template <typename T>
nlohmann::json names_of(const std::vector<T>& v) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& x : v) out.push_back(std::string(to_string(x)));
  return out;
}

inline nlohmann::json depth_list(const std::vector<int>& v) {
  nlohmann::json out = nlohmann::json::array();
  for (int d : v) {
    if (d < 0) {
      out.push_back(nullptr);
    } else {
      out.push_back(d);
    }
  }
  return out;
}

}  // namespace detail

// Canonical form of a resolved config, used for hashing and the run record.
// Paths are written relative to the output directory's parent so that the
// same inputs in a different checkout hash identically.
inline nlohmann::json to_json(const PipelineConfig& c) {
  const auto rel = [&](const std::filesystem::path& p) -> nlohmann::json {
    if (p.empty()) return nullptr;
    return p.lexically_relative(c.paths.output.parent_path()).generic_string();
  };
  nlohmann::json j;
  j["seed"] = c.seed ? nlohmann::json(*c.seed) : nlohmann::json(nullptr);
  j["paths"] = {{"corpus", rel(c.paths.corpus)},
                {"stopwords", rel(c.paths.stopwords)},
                {"emotion_lexicon", rel(c.paths.emotion_lexicon)},
                {"valence_lexicon", rel(c.paths.valence_lexicon)},
                {"synonyms", rel(c.paths.synonyms)},
                {"targets", rel(c.paths.targets)},
                {"demographics", rel(c.paths.demographics)},
                {"output", c.paths.output.filename().generic_string()}};
  j["network"] = {{"k", c.network.k},
                  {"synonym_scope", to_string(c.network.synonym_scope)},
                  {"synonym_edges_in_metrics", c.network.synonym_edges_in_metrics},
                  {"community", to_string(c.network.community)}};
  j["emotions"] = {{"samples", c.emotions.samples}, {"sampling", to_string(c.emotions.sampling)}};
  j["features"] = {{"screen", c.features.screen},
                   {"correlation_threshold", c.features.correlation_threshold},
                   {"collinearity_threshold", c.features.collinearity_threshold},
                   {"train_range", {c.features.train_lo, c.features.train_hi}},
                   {"shap_range", {c.features.shap_lo, c.features.shap_hi}}};
  const auto& g = c.models.gbm;
  const auto& f = c.models.rfr;
  j["models"] = {{"folds", c.models.folds},
                 {"targets", c.models.targets},
                 {"subsets", detail::names_of(c.models.subsets)},
                 {"kinds", detail::names_of(c.models.kinds)},
                 {"n_perm", c.models.n_perm},
                 {"gbm",
                  {{"n_estimators", g.n_estimators},
                   {"learning_rate", g.learning_rate},
                   {"max_depth", detail::depth_list(g.max_depth)},
                   {"max_features", detail::names_of(g.max_features)},
                   {"subsample", g.subsample},
                   {"loss", detail::names_of(g.loss)}}},
                 {"rfr",
                  {{"n_estimators", f.n_estimators},
                   {"max_depth", detail::depth_list(f.max_depth)},
                   {"max_features", detail::names_of(f.max_features)},
                   {"max_leaf_nodes", detail::depth_list(f.max_leaf_nodes)},
                   {"criterion", detail::names_of(f.criterion)}}}};
  j["explain"] = {{"enabled", c.explain.enabled},
                  {"model", to_string(c.explain.model)},
                  {"subset", to_string(c.explain.subset)},
                  {"delta", c.explain.delta},
                  {"n_shuffles", c.explain.n_shuffles}};
  return j;
}

}  // namespace tfmn

#endif  // TFMN_CONFIG_HPP_
