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

#ifndef TFMN_PIPELINE_HPP_
#define TFMN_PIPELINE_HPP_

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"

#include "tfmn/config.hpp"
#include "tfmn/conllu.hpp"
#include "tfmn/csv.hpp"
#include "tfmn/cv.hpp"
#include "tfmn/emotions.hpp"
#include "tfmn/ensemble.hpp"
#include "tfmn/error.hpp"
#include "tfmn/features.hpp"
#include "tfmn/lexicon.hpp"
#include "tfmn/metrics.hpp"
#include "tfmn/network.hpp"
#include "tfmn/rng.hpp"
#include "tfmn/shap.hpp"
#include "tfmn/stats.hpp"
#include "tfmn/text.hpp"

namespace tfmn::pipeline {

namespace fs = std::filesystem;

inline constexpr std::array<std::string_view, 8> kStages = {
    "ingest", "build", "cdf", "metrics", "emotions", "train", "explain", "report"};

inline constexpr std::string_view kManifestFormat = "tfmn-manifest";
inline constexpr int kManifestVersion = 1;

inline bool is_stage(std::string_view name) {
  return std::find(kStages.begin(), kStages.end(), name) != kStages.end();
}

// Stages whose manifests must exist before `stage` can run.
inline std::vector<std::string_view> upstream_of(std::string_view stage) {
  if (stage == "build" || stage == "cdf" || stage == "emotions") return {"ingest"};
  if (stage == "metrics") return {"build"};
  if (stage == "train") return {"ingest", "metrics", "emotions"};
  if (stage == "explain") return {"train"};
  if (stage == "report") return {"train"};
  return {};
}

inline std::string sha256_hex(std::string_view data) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md.data(), &len, EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorKind::kStageFailure, "SHA-256 computation failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += kHex[md[i] >> 4];
    out += kHex[md[i] & 15];
  }
  return out;
}

inline std::string dump(const nlohmann::json& j) { return j.dump(2) + "\n"; }

inline std::string display_name(std::string_view target) {
  if (target == "social_maladjustment") return "Social Maladjustment";
  if (target == "specific_internalising") return "Specific Internalising";
  if (target == "neurodevelopmental_risk") return "Neurodevelopmental Risk";
  return std::string(target);
}

struct Context {
  PipelineConfig config;
  std::ostream* log = &std::cerr;

  std::uint64_t seed() const { return *config.seed; }
  fs::path stage_dir(std::string_view stage) const { return config.paths.output / std::string(stage); }

  void info(std::string_view stage, const std::string& msg) const {
    if (log) *log << "[" << stage << "] " << msg << "\n";
  }
};

// Collects a stage's files. The stage directory is emptied on creation;
// files are written as they are added so a failing stage leaves its partial
// output behind, and the manifest is written last.
class StageWriter {
 public:
  StageWriter(const Context& ctx, std::string_view stage) : ctx_(ctx), stage_(stage), dir_(ctx.stage_dir(stage)) {
    std::error_code ec;
    fs::remove_all(dir_, ec);
    fs::create_directories(dir_);
    add("config.json", dump(to_json(ctx.config)));
  }

  void add(const std::string& rel, std::string_view content) {
    const fs::path p = dir_ / rel;
    fs::create_directories(p.parent_path());
    text::write_file(p.string(), content);
    files_[rel] = {sha256_hex(content), content.size()};
  }

  void add_json(const std::string& rel, const nlohmann::json& j) { add(rel, dump(j)); }

  // Returns the manifest's own hash.
  std::string finish() {
    nlohmann::json inputs = nlohmann::json::object();
    for (auto up : upstream_of(stage_)) {
      inputs[std::string(up)] = sha256_hex(text::read_file((ctx_.stage_dir(up) / "manifest.json").string()));
    }
    nlohmann::json outputs = nlohmann::json::array();
    for (const auto& [path, info] : files_) {
      outputs.push_back({{"path", path}, {"sha256", info.first}, {"bytes", info.second}});
    }
    const std::string config_hash = files_.at("config.json").first;
    const nlohmann::json m = {{"format", kManifestFormat},
                              {"version", kManifestVersion},
                              {"stage", stage_},
                              {"seed", ctx_.seed()},
                              {"config_sha256", config_hash},
                              {"inputs", inputs},
                              {"outputs", outputs}};
    const std::string text = dump(m);
    text::write_file((dir_ / "manifest.json").string(), text);
    return sha256_hex(text);
  }

  const fs::path& dir() const { return dir_; }

 private:
  const Context& ctx_;
  std::string stage_;
  fs::path dir_;
  std::map<std::string, std::pair<std::string, std::size_t>> files_;
};

inline void require_upstream(const Context& ctx, std::string_view stage) {
  for (auto up : upstream_of(stage)) {
    if (!fs::is_regular_file(ctx.stage_dir(up) / "manifest.json")) {
      throw Error(ErrorKind::kMissingUpstreamArtifact,
                  "stage '" + std::string(stage) + "' needs the output of '" + std::string(up) +
                      "'; run '" + std::string(up) + "' first");
    }
  }
}

inline std::string read_artifact(const Context& ctx, std::string_view stage, const std::string& rel) {
  const fs::path p = ctx.stage_dir(stage) / rel;
  if (!fs::is_regular_file(p)) {
    throw Error(ErrorKind::kMissingUpstreamArtifact,
                "missing " + p.string() + "; rerun stage '" + std::string(stage) + "'");
  }
  return text::read_file(p.string());
}

// Root manifest: hash of every stage manifest currently present.
inline std::string write_root_manifest(const Context& ctx) {
  nlohmann::json stages = nlohmann::json::object();
  for (auto s : kStages) {
    const fs::path p = ctx.stage_dir(s) / "manifest.json";
    if (fs::is_regular_file(p)) stages[std::string(s)] = sha256_hex(text::read_file(p.string()));
  }
  const nlohmann::json m = {{"format", kManifestFormat},
                            {"version", kManifestVersion},
                            {"seed", ctx.seed()},
                            {"stages", stages}};
  const std::string text = dump(m);
  text::write_file((ctx.config.paths.output / "manifest.json").string(), text);
  return sha256_hex(text);
}

// ---------------------------------------------------------------------------
// Shared loaders

inline StopwordSet stopwords(const Context& ctx) { return load_stopwords(ctx.config.paths.stopwords.string()); }

inline std::vector<Transcript> ingested_corpus(const Context& ctx) {
  return parse_conllu(read_artifact(ctx, "ingest", "corpus.conllu"), stopwords(ctx)).transcripts;
}

inline EmotionLexicon emotion_lexicon(const Context& ctx) {
  return load_emotion_lexicon(ctx.config.paths.emotion_lexicon.string());
}

inline ValenceLexicon valence_lexicon(const Context& ctx, const EmotionLexicon& emo) {
  if (ctx.config.paths.valence_lexicon.empty()) return emo.valence();
  return load_valence_lexicon(ctx.config.paths.valence_lexicon.string());
}

inline std::vector<fs::path> corpus_files(const fs::path& corpus) {
  std::vector<fs::path> files;
  if (fs::is_directory(corpus)) {
    for (const auto& e : fs::directory_iterator(corpus)) {
      if (e.is_regular_file() && e.path().extension() == ".conllu") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
  } else {
    files.push_back(corpus);
  }
  if (files.empty()) throw Error(ErrorKind::kIo, "no .conllu files under " + corpus.string());
  return files;
}

// ---------------------------------------------------------------------------
// Stages

inline std::string ingest(const Context& ctx) {
  StageWriter out(ctx, "ingest");
  const auto stop = stopwords(ctx);
  std::vector<Transcript> corpus;
  std::vector<ParseWarning> warnings;
  std::set<std::string> seen;
  for (const auto& file : corpus_files(ctx.config.paths.corpus)) {
    auto res = parse_conllu(text::read_file(file.string()), stop, file.stem().string());
    for (auto& t : res.transcripts) {
      if (!seen.insert(t.transcript_id).second) {
        throw Error(ErrorKind::kInvalidArgument,
                    "transcript id '" + t.transcript_id + "' appears in more than one file");
      }
      corpus.push_back(std::move(t));
    }
    warnings.insert(warnings.end(), res.warnings.begin(), res.warnings.end());
  }
  std::sort(corpus.begin(), corpus.end(),
            [](const Transcript& a, const Transcript& b) { return a.transcript_id < b.transcript_id; });
  if (!ctx.config.paths.demographics.empty()) {
    const auto demo = parse_demographics_csv(text::read_file(ctx.config.paths.demographics.string()),
                                             ctx.config.paths.demographics.string());
    for (auto& t : corpus) {
      if (auto it = demo.find(t.transcript_id); it != demo.end()) t.demographics = it->second;
    }
  }
  csv::Table summary{{"transcript_id", "sentences", "tokens", "network_tokens", "age", "sex"}, {}};
  for (const auto& t : corpus) {
    std::size_t tokens = 0;
    for (const auto& s : t.sentences) tokens += s.size();
    summary.rows.push_back({t.transcript_id, std::to_string(t.sentences.size()), std::to_string(tokens),
                            std::to_string(transcript_words(t).size()),
                            t.demographics.age ? text::format_double(*t.demographics.age) : "",
                            t.demographics.sex ? std::to_string(*t.demographics.sex) : ""});
  }
  csv::Table warn{{"transcript_id", "sentence_id", "line", "reason"}, {}};
  for (const auto& w : warnings) {
    warn.rows.push_back({w.transcript_id, w.sentence_id, std::to_string(w.line), w.reason});
  }
  out.add("corpus.conllu", write_conllu(corpus));
  out.add("transcripts.csv", csv::format(summary));
  out.add("warnings.csv", csv::format(warn));
  ctx.info("ingest", std::to_string(corpus.size()) + " transcripts, " + std::to_string(warnings.size()) +
                         " dropped sentences");
  return out.finish();
}

inline std::string build(const Context& ctx) {
  require_upstream(ctx, "build");
  StageWriter out(ctx, "build");
  const auto corpus = ingested_corpus(ctx);
  const auto emo = emotion_lexicon(ctx);
  const auto val = valence_lexicon(ctx, emo);
  std::optional<SynonymLexicon> syn;
  if (!ctx.config.paths.synonyms.empty()) syn = load_synonym_lexicon(ctx.config.paths.synonyms.string());
  nlohmann::json networks = nlohmann::json::object();
  csv::Table excluded{{"transcript_id", "reason"}, {}};
  csv::Table sizes{{"transcript_id", "nodes", "edges", "syntactic_edges", "synonym_edges"}, {}};
  for (const auto& t : corpus) {
    Tfmn g;
    try {
      g = build_syntactic(t, ctx.config.network.k);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::kEmptyNetwork) throw;
      excluded.rows.push_back({t.transcript_id, "EmptyNetwork"});
      continue;
    }
    if (syn) g = enrich_synonyms(std::move(g), *syn, ctx.config.network.synonym_scope);
    g = tag_nodes(std::move(g), emo, val);
    std::size_t n_syn = 0;
    std::size_t n_syntactic = 0;
    for (const auto& [pair, kinds] : g.edges) {
      n_syn += kinds.synonym ? 1 : 0;
      n_syntactic += kinds.syntactic ? 1 : 0;
    }
    sizes.rows.push_back({t.transcript_id, std::to_string(g.nodes.size()), std::to_string(g.num_edges()),
                          std::to_string(n_syntactic), std::to_string(n_syn)});
    out.add("edges/" + t.transcript_id + ".tsv", format_edge_list(g));
    out.add("tags/" + t.transcript_id + ".tsv", format_node_tags(g));
    networks[t.transcript_id] = to_json(g);
  }
  out.add_json("networks.json", networks);
  out.add("networks.csv", csv::format(sizes));
  out.add("excluded.csv", csv::format(excluded));
  ctx.info("build", std::to_string(networks.size()) + " networks at k = " +
                        std::to_string(ctx.config.network.k) + ", " + std::to_string(excluded.rows.size()) +
                        " empty");
  return out.finish();
}

inline std::string format_cdf_table(const DistanceCdf& cdf) {
  csv::Table t{{"k", "pairs_at_k", "cdf"}, {}};
  for (const auto& [k, frac] : cdf.table()) {
    const auto it = cdf.counts.find(k);
    t.rows.push_back({std::to_string(k), std::to_string(it == cdf.counts.end() ? 0 : it->second),
                      text::format_fixed(frac, 4)});
  }
  return csv::format(t);
}

inline std::string cdf(const Context& ctx, std::ostream* table_out = nullptr) {
  require_upstream(ctx, "cdf");
  StageWriter out(ctx, "cdf");
  const auto dist = distance_cdf(ingested_corpus(ctx));
  const std::string table = format_cdf_table(dist);
  out.add("cdf.csv", table);
  out.add_json("cdf.json", {{"total_pairs", dist.total_pairs},
                            {"k", ctx.config.network.k},
                            {"cdf_at_k", dist.at(ctx.config.network.k)}});
  if (table_out) *table_out << table;
  ctx.info("cdf", "P(distance <= " + std::to_string(ctx.config.network.k) +
                      ") = " + text::format_fixed(dist.at(ctx.config.network.k), 4));
  return out.finish();
}

inline std::string metrics_stage(const Context& ctx) {
  require_upstream(ctx, "metrics");
  StageWriter out(ctx, "metrics");
  const auto networks = nlohmann::json::parse(read_artifact(ctx, "build", "networks.json"));
  std::map<std::string, metrics::MetricVector> rows;
  for (const auto& [id, doc] : networks.items()) {
    const Tfmn g = tfmn_from_json(doc);
    metrics::MetricOptions opt;
    opt.community = ctx.config.network.community;
    opt.community_seed = derive_seed(ctx.seed(), "community:" + id);
    rows[id] = metrics::compute_metrics(g.to_graph(ctx.config.network.synonym_edges_in_metrics), opt);
  }
  out.add("metrics.csv", metrics::format_metrics_csv(rows));
  ctx.info("metrics", std::to_string(rows.size()) + " metric vectors");
  return out.finish();
}

inline std::string emotions_stage(const Context& ctx) {
  require_upstream(ctx, "emotions");
  StageWriter out(ctx, "emotions");
  const auto corpus = ingested_corpus(ctx);
  const auto lex = emotion_lexicon(ctx);
  std::map<std::string, EmotionProfile> profiles;
  for (const auto& t : corpus) {
    const auto words = transcript_words(t);
    profiles[t.transcript_id] = profile_words(words, lex, ctx.config.emotions.samples,
                                              transcript_seed(ctx.seed(), t.transcript_id),
                                              ctx.config.emotions.sampling);
  }
  out.add("profiles.csv", format_profiles_csv(profiles));
  ctx.info("emotions", std::to_string(profiles.size()) + " profiles, N = " +
                           std::to_string(ctx.config.emotions.samples));
  return out.finish();
}

// ---------------------------------------------------------------------------
// Training

inline std::vector<EnsembleConfig> grid_for(const Context& ctx, ModelKind kind, std::uint64_t seed) {
  return kind == ModelKind::kGbm ? ctx.config.models.gbm.expand(seed) : ctx.config.models.rfr.expand(seed);
}

// Predictor columns of `subset` that pass the screen for target j: one
// representative per collinear group, and |r| with the target above the
// correlation threshold.
inline std::vector<std::string> screened_features(const Context& ctx, const FeatureTable& subset,
                                                  std::size_t j) {
  if (!ctx.config.features.screen) return subset.predictor_names;
  const auto s = correlation_screen(subset, ctx.config.features.collinearity_threshold, j);
  std::vector<std::string> out;
  for (const auto& name : s.selected) {
    const auto c = *subset.predictor_index(name);
    if (std::abs(s.target_corr(c, j)) > ctx.config.features.correlation_threshold) out.push_back(name);
  }
  return out;
}

inline FeatureSubset permutation_subset(const Context& ctx) {
  const auto& subs = ctx.config.models.subsets;
  return std::find(subs.begin(), subs.end(), FeatureSubset::kCombined) != subs.end() ? FeatureSubset::kCombined
                                                                                      : subs.front();
}

inline std::string train(const Context& ctx) {
  require_upstream(ctx, "train");
  StageWriter out(ctx, "train");
  const auto& cfg = ctx.config;
  const auto network = metrics::parse_metrics_csv(read_artifact(ctx, "metrics", "metrics.csv"));
  const auto profiles = parse_profiles_csv(read_artifact(ctx, "emotions", "profiles.csv"));
  const auto demographics = parse_demographics_csv(read_artifact(ctx, "ingest", "transcripts.csv"));
  auto targets = parse_targets_csv(text::read_file(cfg.paths.targets.string()), cfg.paths.targets.string());
  for (const auto& name : cfg.models.targets) {
    if (std::find(targets.names.begin(), targets.names.end(), name) == targets.names.end()) {
      throw Error(ErrorKind::kSchemaMismatch, "target column '" + name + "' not in " + cfg.paths.targets.string());
    }
  }
  const auto assembled = assemble(network, profiles, demographics, targets);
  const FeatureTable& raw = assembled.table;
  csv::Table excluded{{"transcript_id", "reason"}, {}};
  for (const auto& e : assembled.excluded) excluded.rows.push_back({e.transcript_id, e.reason});
  out.add("excluded.csv", csv::format(excluded));
  out.add("features.csv", format_feature_csv(raw));
  const FeatureTable scaled = minmax_scale(raw, cfg.features.train_lo, cfg.features.train_hi);
  out.add("features_scaled.csv", format_feature_csv(scaled));
  out.add_json("scaling.json", scaling_manifest(scaled));
  ctx.info("train", std::to_string(raw.rows()) + " rows x " + std::to_string(raw.num_predictors()) +
                        " predictors, " + std::to_string(assembled.excluded.size()) + " excluded");

  const auto screen = correlation_screen(scaled, cfg.features.collinearity_threshold, 0);
  out.add("correlation.csv", format_correlation_csv(screen, scaled.predictor_names));
  out.add("feature_target.csv", format_feature_target_csv(screen, scaled, cfg.features.correlation_threshold));

  const std::uint64_t cv_seed = derive_seed(ctx.seed(), "cv");
  nlohmann::json screen_json = nlohmann::json::object();
  nlohmann::json results = nlohmann::json::array();
  nlohmann::json permuted = nlohmann::json::array();
  for (FeatureSubset subset : cfg.models.subsets) {
    const std::string sub(to_string(subset));
    const FeatureTable table = scaled.subset(subset);
    for (const auto& target : cfg.models.targets) {
      const std::size_t j = *table.target_index(target);
      const auto y = table.target(j);
      const auto features = screened_features(ctx, table, j);
      screen_json[sub][target] = features;
      for (ModelKind kind : cfg.models.kinds) {
        const std::string kname(to_string(kind));
        const std::string base = sub + "/" + target + "/" + kname;
        nlohmann::json row = {{"subset", sub}, {"target", target}, {"model", kname},
                              {"rows", table.rows()}, {"features", features}};
        if (features.empty()) {
          row["status"] = "no_features";
          results.push_back(row);
          ctx.info("train", base + ": no feature passed the screen");
          continue;
        }
        const Matrix x = table.select_predictors(features).predictors;
        auto rep = cross_validate(x, y, grid_for(ctx, kind, derive_seed(ctx.seed(), "model")), cfg.models.folds,
                                  cv_seed, features);
        rep.row_ids = table.ids;
        out.add_json("cv/" + base + ".json", to_json(rep));
        out.add("cv/" + base + "_predictions.csv", format_predictions_csv(rep));
        out.add("cv/" + base + "_grid.csv", format_grid_csv(rep));
        out.add_json("models/" + base + ".json", to_json(fit_ensemble(x, y, rep.config, features)));
        row["status"] = "ok";
        row["pearson_r"] = rep.pearson_r;
        row["p_value"] = rep.p_value;
        row["mae"] = rep.mae;
        row["significant"] = rep.significant;
        row["config"] = to_json(rep.config);
        results.push_back(row);
        ctx.info("train", base + ": r = " + text::format_fixed(rep.pearson_r, 3) +
                              ", p = " + text::format_fixed(rep.p_value, 4) +
                              ", MAE = " + text::format_fixed(rep.mae, 3) + " (" +
                              std::to_string(rep.grid_size) + " configs)");

        if (subset != permutation_subset(ctx) || cfg.models.n_perm == 0) continue;
        const auto reps = permutation_baseline(x, y, {rep.config}, cfg.models.folds, cv_seed,
                                               cfg.models.n_perm, false, features);
        std::vector<double> rs;
        std::vector<double> ps;
        std::vector<double> maes;
        std::size_t non_sig = 0;
        std::size_t as_extreme = 0;
        nlohmann::json list = nlohmann::json::array();
        for (const auto& p : reps) {
          rs.push_back(p.pearson_r);
          ps.push_back(p.p_value);
          maes.push_back(p.mae);
          non_sig += p.p_value > kSignificanceLevel ? 1 : 0;
          as_extreme += std::abs(p.pearson_r) >= std::abs(rep.pearson_r) ? 1 : 0;
          list.push_back({{"pearson_r", p.pearson_r}, {"p_value", p.p_value}, {"mae", p.mae}});
        }
        const nlohmann::json prow = {
            {"subset", sub},
            {"target", target},
            {"model", kname},
            {"n_perm", reps.size()},
            {"pearson_r", stats::median(rs)},
            {"p_value", stats::median(ps)},
            {"mae", stats::median(maes)},
            {"fraction_not_significant", static_cast<double>(non_sig) / static_cast<double>(reps.size())},
            {"permutation_p", static_cast<double>(as_extreme + 1) / static_cast<double>(reps.size() + 1)},
            {"config", to_json(rep.config)},
            {"repetitions", list}};
        out.add_json("permutation/" + target + "/" + kname + ".json", prow);
        nlohmann::json brief = prow;
        brief.erase("repetitions");
        permuted.push_back(brief);
      }
    }
  }
  out.add_json("screen.json", screen_json);
  out.add_json("summary.json", {{"rows", raw.rows()},
                                {"folds", cfg.models.folds},
                                {"selection_rule", kSelectionRule},
                                {"results", results},
                                {"permuted", permuted}});
  return out.finish();
}

// ---------------------------------------------------------------------------
// Explanation

inline std::optional<ModelKind> explain_kind(const Context& ctx, const nlohmann::json& summary,
                                             const std::string& target) {
  if (ctx.config.explain.model == ExplainModel::kRfr) return ModelKind::kRfr;
  if (ctx.config.explain.model == ExplainModel::kGbm) return ModelKind::kGbm;
  const std::string sub(to_string(ctx.config.explain.subset));
  std::optional<ModelKind> best;
  double best_r = -1;
  for (const auto& row : summary.at("results")) {
    if (row.at("subset") != sub || row.at("target") != target || row.at("status") != "ok") continue;
    const double r = std::abs(row.at("pearson_r").get<double>());
    if (r > best_r) {
      best_r = r;
      best = parse_model_kind(row.at("model").get<std::string>());
    }
  }
  return best;
}

inline std::string explain(const Context& ctx) {
  require_upstream(ctx, "explain");
  StageWriter out(ctx, "explain");
  const auto& cfg = ctx.config;
  const auto summary = nlohmann::json::parse(read_artifact(ctx, "train", "summary.json"));
  const std::vector<std::string> targets(kTargetColumns.begin(), kTargetColumns.end());
  const auto raw = parse_feature_csv(read_artifact(ctx, "train", "features.csv"), targets);
  const auto scaled = minmax_scale(raw, cfg.features.train_lo, cfg.features.train_hi).subset(cfg.explain.subset);
  const auto plot_space = minmax_scale(raw, cfg.features.shap_lo, cfg.features.shap_hi).subset(cfg.explain.subset);
  const std::uint64_t seed = derive_seed(ctx.seed(), "explain");
  nlohmann::json index = nlohmann::json::array();
  for (const auto& target : cfg.models.targets) {
    const auto kind = explain_kind(ctx, summary, target);
    if (!kind) {
      ctx.info("explain", target + ": no trained model to explain");
      index.push_back({{"target", target}, {"status", "no_model"}});
      continue;
    }
    const std::size_t j = *scaled.target_index(target);
    const auto y = scaled.target(j);
    const auto grid = grid_for(ctx, *kind, derive_seed(ctx.seed(), "model"));
    const auto elim = shap_feature_elimination(scaled.predictors, y, grid, cfg.models.folds, seed,
                                               scaled.predictor_names, cfg.explain.delta, cfg.explain.n_shuffles);
    const std::string dir = target + "/";
    out.add_json(dir + "elimination.json", to_json(elim));

    const Matrix x_kept = scaled.predictors.select_columns(elim.kept_columns);
    const auto model = fit_ensemble(x_kept, y, elim.config, elim.kept);
    out.add_json(dir + "model.json", to_json(model));
    const ShapMatrix shap = tree_shap(model, x_kept);
    csv::Table values{{"transcript_id"}, {}};
    values.header.insert(values.header.end(), shap.feature_names.begin(), shap.feature_names.end());
    for (std::size_t r = 0; r < shap.values.rows(); ++r) {
      std::vector<std::string> row{scaled.ids[r]};
      for (std::size_t c = 0; c < shap.values.cols(); ++c) row.push_back(text::format_double(shap.values(r, c)));
      values.rows.push_back(std::move(row));
    }
    out.add(dir + "shap_values.csv", csv::format(values));
    auto bundle = export_plots(shap, plot_space.predictors.select_columns(elim.kept_columns), scaled.ids);
    out.add(dir + "beeswarm.csv", bundle.beeswarm_csv);
    out.add(dir + "bar.csv", bundle.bar_csv);
    out.add(dir + "heatmap.csv", bundle.heatmap_csv);
    bundle.summary["target"] = target;
    bundle.summary["model"] = to_string(*kind);
    bundle.summary["config"] = to_json(elim.config);
    out.add_json(dir + "summary.json", bundle.summary);
    std::vector<std::string> codes;
    for (const auto& f : shap.feature_names) codes.push_back(feature_code(f));
    index.push_back({{"target", target},
                     {"status", "ok"},
                     {"model", to_string(*kind)},
                     {"subset", to_string(cfg.explain.subset)},
                     {"kept", elim.kept},
                     {"codes", codes},
                     {"pearson_r", elim.final_report.pearson_r},
                     {"p_value", elim.final_report.p_value},
                     {"mae", elim.final_report.mae}});
    ctx.info("explain", target + " (" + std::string(to_string(*kind)) + "): kept " +
                            std::to_string(elim.kept.size()) + " of " + std::to_string(scaled.num_predictors()) +
                            ", r = " + text::format_fixed(elim.final_report.pearson_r, 3));
  }
  out.add_json("index.json", index);
  return out.finish();
}

// ---------------------------------------------------------------------------
// Report

struct ReportBundle {
  std::map<std::string, csv::Table> tables;  // file stem -> table
  std::string markdown;
};

inline std::string fmt_p(double p) { return p < 0.001 ? "<0.001" : text::format_fixed(p, 3); }

inline std::string codes_of(const nlohmann::json& names) {
  std::vector<std::string> codes;
  for (const auto& n : names) codes.push_back(feature_code(n.get<std::string>()));
  return text::join(codes, " ");
}

inline std::string markdown_table(const std::string& title, const csv::Table& t) {
  std::string md = "### " + title + "\n\n| " + text::join(t.header, " | ") + " |\n|";
  for (std::size_t i = 0; i < t.header.size(); ++i) md += "---|";
  md += "\n";
  for (const auto& row : t.rows) md += "| " + text::join(row, " | ") + " |\n";
  return md + "\n";
}

// Four tables: combined, network-only and emotion-only cross-validation
// results, and the permuted-target baseline. Significant r values carry a
// star. With explanation output present a fifth table lists the features
// that survived elimination.
inline ReportBundle compile_report(const nlohmann::json& summary, const nlohmann::json* explain_index) {
  ReportBundle b;
  const std::vector<std::pair<std::string, std::string>> layout = {
      {"combined", "table_combined"}, {"network", "table_network"}, {"emotion", "table_emotion"}};
  const std::vector<std::string> header{"Target", "Model", "r", "p", "MAE", "Features"};
  for (const auto& [subset, stem] : layout) {
    csv::Table t{header, {}};
    for (const auto& row : summary.at("results")) {
      if (row.at("subset") != subset) continue;
      const std::string target = row.at("target");
      const std::string model = row.at("model");
      if (row.at("status") != "ok") {
        t.rows.push_back({display_name(target), model, "", "", "", "(no features)"});
        continue;
      }
      const double r = row.at("pearson_r");
      const double p = row.at("p_value");
      const std::string features = codes_of(row.at("features"));
      t.rows.push_back({display_name(target), model == "rfr" ? "RFR" : "GBM",
                        text::format_fixed(r, 2) + (p < kSignificanceLevel ? "*" : ""), fmt_p(p),
                        text::format_fixed(row.at("mae").get<double>(), 2), features});
    }
    b.tables[stem] = std::move(t);
  }
  csv::Table perm{{"Target", "Model", "r", "p", "MAE", "Repetitions", "Not significant"}, {}};
  for (const auto& row : summary.at("permuted")) {
    const std::string model = row.at("model");
    perm.rows.push_back({display_name(row.at("target").get<std::string>()), model == "rfr" ? "RFR" : "GBM",
                         text::format_fixed(row.at("pearson_r").get<double>(), 2),
                         fmt_p(row.at("p_value").get<double>()),
                         text::format_fixed(row.at("mae").get<double>(), 2),
                         std::to_string(row.at("n_perm").get<std::size_t>()),
                         text::format_fixed(100 * row.at("fraction_not_significant").get<double>(), 0) + "%"});
  }
  b.tables["table_permuted"] = std::move(perm);

  b.markdown = "# Results\n\n" + std::to_string(summary.at("rows").get<std::size_t>()) + " transcripts, " +
               std::to_string(summary.at("folds").get<std::size_t>()) +
               "-fold cross-validation. Stars mark p < 0.05.\n\n";
  b.markdown += markdown_table("Network and emotion features", b.tables["table_combined"]);
  b.markdown += markdown_table("Network features only", b.tables["table_network"]);
  b.markdown += markdown_table("Emotion features only", b.tables["table_emotion"]);
  b.markdown += markdown_table("Permuted targets", b.tables["table_permuted"]);
  if (explain_index) {
    csv::Table kept{{"Target", "Model", "Subset", "r", "p", "MAE", "Kept features"}, {}};
    for (const auto& e : *explain_index) {
      if (e.at("status") != "ok") continue;
      const std::string model = e.at("model");
      const double p = e.at("p_value");
      kept.rows.push_back({display_name(e.at("target").get<std::string>()), model == "rfr" ? "RFR" : "GBM",
                           e.at("subset").get<std::string>(),
                           text::format_fixed(e.at("pearson_r").get<double>(), 2) + (p < kSignificanceLevel ? "*" : ""),
                           fmt_p(p), text::format_fixed(e.at("mae").get<double>(), 2), codes_of(e.at("kept"))});
    }
    b.tables["table_explained"] = kept;
    b.markdown += markdown_table("After SHAP feature elimination", kept);
  }
  b.markdown += "Feature codes: 1 modularity, 2 core number, 3 local efficiency, 4 max closeness, 5 age, "
                "6 mean betweenness, 7 max betweenness; S sadness, J joy, D disgust, F fear, "
                "A anticipation, U surprise, T trust, G anger.\n";
  return b;
}

inline std::string report(const Context& ctx, ReportBundle* bundle_out = nullptr) {
  require_upstream(ctx, "report");
  StageWriter out(ctx, "report");
  const auto summary = nlohmann::json::parse(read_artifact(ctx, "train", "summary.json"));
  std::optional<nlohmann::json> index;
  if (fs::is_regular_file(ctx.stage_dir("explain") / "manifest.json")) {
    index = nlohmann::json::parse(read_artifact(ctx, "explain", "index.json"));
  }
  auto bundle = compile_report(summary, index ? &*index : nullptr);
  for (const auto& [stem, table] : bundle.tables) out.add(stem + ".csv", csv::format(table));
  out.add("report.md", bundle.markdown);
  ctx.info("report", std::to_string(bundle.tables.size()) + " tables");
  if (bundle_out) *bundle_out = std::move(bundle);
  return out.finish();
}

// ---------------------------------------------------------------------------

// Failure inside a named stage. Keeps the kind of the underlying error.
class StageError : public std::runtime_error {
 public:
  StageError(std::string stage, ErrorKind kind, const std::string& what)
      : std::runtime_error("stage '" + stage + "' failed: " + what), stage_(std::move(stage)), kind_(kind) {}

  const std::string& stage() const noexcept { return stage_; }
  ErrorKind kind() const noexcept { return kind_; }

 private:
  std::string stage_;
  ErrorKind kind_;
};

inline std::string dispatch(const Context& ctx, std::string_view stage, std::ostream* table_out) {
  if (stage == "ingest") return ingest(ctx);
  if (stage == "build") return build(ctx);
  if (stage == "cdf") return cdf(ctx, table_out);
  if (stage == "metrics") return metrics_stage(ctx);
  if (stage == "emotions") return emotions_stage(ctx);
  if (stage == "train") return train(ctx);
  if (stage == "explain") return explain(ctx);
  if (stage == "report") return report(ctx);
  throw Error(ErrorKind::kConfig, "unknown stage '" + std::string(stage) + "'");
}

// Runs one stage and refreshes the root manifest. Returns the stage
// manifest hash.
inline std::string run_stage(const Context& ctx, std::string_view stage, std::ostream* table_out = nullptr) {
  if (!is_stage(stage)) throw Error(ErrorKind::kConfig, "unknown stage '" + std::string(stage) + "'");
  std::string hash;
  try {
    hash = dispatch(ctx, stage, table_out);
  } catch (const Error& e) {
    throw StageError(std::string(stage), e.kind(), e.what());
  } catch (const std::exception& e) {
    throw StageError(std::string(stage), ErrorKind::kStageFailure, e.what());
  }
  write_root_manifest(ctx);
  return hash;
}

// Every stage in order. Returns the root manifest hash.
inline std::string run(const Context& ctx) {
  for (auto stage : kStages) {
    if (stage == "explain" && !ctx.config.explain.enabled) {
      std::error_code ec;
      fs::remove_all(ctx.stage_dir("explain"), ec);
      continue;
    }
    run_stage(ctx, stage);
  }
  return write_root_manifest(ctx);
}

}  // namespace tfmn::pipeline

#endif  // TFMN_PIPELINE_HPP_
