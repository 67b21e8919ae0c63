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

#include <algorithm>
#include <filesystem>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "tfmn/pipeline.hpp"

namespace tfmn::pipeline {
namespace {

const fs::path kFixtures = TFMN_FIXTURE_DIR;

// Fresh scratch directory per test; the output lives at <scratch>/<sub>/out.
class PipelineTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    scratch_ = fs::temp_directory_path() / ("tfmn_" + std::string(info->name()));
    fs::remove_all(scratch_);
  }
  void TearDown() override {
    if (!HasFailure()) fs::remove_all(scratch_);
  }

  Context context(const std::string& sub = "a") const {
    Context ctx;
    ctx.config = load_config(kFixtures / "run.toml");
    ctx.config.paths.output = scratch_ / sub / "out";
    ctx.log = nullptr;
    validate(ctx.config);
    return ctx;
  }

  fs::path scratch_;
};

std::map<std::string, std::string> read_tree(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) out[fs::relative(e.path(), root).generic_string()] = text::read_file(e.path().string());
  }
  return out;
}

ErrorKind stage_error_kind(const std::function<void()>& f, std::string* stage = nullptr,
                           std::string* what = nullptr) {
  try {
    f();
  } catch (const StageError& e) {
    if (stage) *stage = e.stage();
    if (what) *what = e.what();
    return e.kind();
  }
  ADD_FAILURE() << "no stage error";
  return ErrorKind::kInvalidArgument;
}

TEST_F(PipelineTest, FixtureRunsEndToEnd) {
  const auto ctx = context();
  run(ctx);
  const fs::path out = ctx.config.paths.output;
  for (auto s : kStages) EXPECT_TRUE(fs::is_regular_file(out / std::string(s) / "manifest.json")) << s;
  EXPECT_TRUE(fs::is_regular_file(out / "manifest.json"));
  for (const char* f : {"ingest/corpus.conllu", "build/networks.json", "cdf/cdf.csv", "metrics/metrics.csv",
                        "emotions/profiles.csv", "train/features.csv", "train/summary.json",
                        "explain/index.json", "report/report.md"}) {
    EXPECT_TRUE(fs::is_regular_file(out / f)) << f;
  }
  const auto metrics = metrics::parse_metrics_csv(text::read_file((out / "metrics/metrics.csv").string()));
  EXPECT_EQ(metrics.size(), 10u);
  const auto warnings = csv::parse(text::read_file((out / "ingest/warnings.csv").string()), "warnings");
  ASSERT_EQ(warnings.rows.size(), 1u);
  EXPECT_EQ(warnings.rows[0][0], "t04");

  const auto summary = nlohmann::json::parse(text::read_file((out / "train/summary.json").string()));
  EXPECT_EQ(summary["rows"], 10);
  EXPECT_EQ(summary["results"].size(), 3u * 3u * 2u);
  EXPECT_EQ(summary["permuted"].size(), 3u * 2u);
  for (const auto& row : summary["permuted"]) EXPECT_EQ(row["n_perm"], 3);
}

TEST_F(PipelineTest, RerunIsByteIdentical) {
  const auto a = context("a");
  const auto b = context("b");
  const std::string ha = run(a);
  const std::string hb = run(b);
  EXPECT_EQ(ha, hb);
  const auto ta = read_tree(a.config.paths.output);
  const auto tb = read_tree(b.config.paths.output);
  ASSERT_EQ(ta.size(), tb.size());
  for (const auto& [path, content] : ta) {
    ASSERT_TRUE(tb.count(path)) << path;
    EXPECT_EQ(content, tb.at(path)) << path;
  }
  EXPECT_EQ(run(a), ha);
}

TEST_F(PipelineTest, SeedChangesResults) {
  auto a = context("a");
  auto b = context("b");
  b.config.seed = *a.config.seed + 1;
  run_stage(a, "ingest");
  run_stage(a, "emotions");
  run_stage(b, "ingest");
  run_stage(b, "emotions");
  EXPECT_NE(text::read_file((a.config.paths.output / "emotions/profiles.csv").string()),
            text::read_file((b.config.paths.output / "emotions/profiles.csv").string()));
}

TEST_F(PipelineTest, StagesOneByOneMatchFullRun) {
  const auto a = context("a");
  const auto b = context("b");
  const std::string full = run(a);
  for (auto s : kStages) run_stage(b, s);
  EXPECT_EQ(write_root_manifest(b), full);
}

TEST_F(PipelineTest, EveryFileIsDeclaredInItsManifest) {
  const auto ctx = context();
  run(ctx);
  const fs::path out = ctx.config.paths.output;
  std::set<std::string> top;
  for (const auto& e : fs::directory_iterator(out)) top.insert(e.path().filename().string());
  std::set<std::string> expected{"manifest.json"};
  for (auto s : kStages) expected.insert(std::string(s));
  EXPECT_EQ(top, expected);

  const auto root = nlohmann::json::parse(text::read_file((out / "manifest.json").string()));
  for (auto s : kStages) {
    const fs::path dir = out / std::string(s);
    const std::string manifest_text = text::read_file((dir / "manifest.json").string());
    EXPECT_EQ(root["stages"][std::string(s)], sha256_hex(manifest_text)) << s;
    const auto manifest = nlohmann::json::parse(manifest_text);
    EXPECT_EQ(manifest["stage"], std::string(s));
    std::map<std::string, std::string> declared;
    for (const auto& o : manifest["outputs"]) declared[o["path"]] = o["sha256"];
    auto files = read_tree(dir);
    files.erase("manifest.json");
    ASSERT_EQ(files.size(), declared.size()) << s;
    for (const auto& [path, content] : files) {
      ASSERT_TRUE(declared.count(path)) << s << "/" << path << " is not in the manifest";
      EXPECT_EQ(declared[path], sha256_hex(content)) << path;
    }
    for (const auto& [up, hash] : manifest["inputs"].items()) {
      EXPECT_EQ(hash, sha256_hex(text::read_file((out / up / "manifest.json").string()))) << s << " <- " << up;
    }
  }
}

TEST_F(PipelineTest, MissingUpstreamNamesTheStageToRunFirst) {
  const auto ctx = context();
  std::string stage;
  std::string what;
  EXPECT_EQ(stage_error_kind([&] { run_stage(ctx, "metrics"); }, &stage, &what),
            ErrorKind::kMissingUpstreamArtifact);
  EXPECT_EQ(stage, "metrics");
  EXPECT_NE(what.find("run 'build' first"), std::string::npos) << what;
  EXPECT_FALSE(fs::exists(ctx.stage_dir("metrics")));

  run_stage(ctx, "ingest");
  EXPECT_EQ(stage_error_kind([&] { run_stage(ctx, "train"); }, nullptr, &what),
            ErrorKind::kMissingUpstreamArtifact);
  EXPECT_NE(what.find("'metrics'"), std::string::npos) << what;
  EXPECT_EQ(stage_error_kind([&] { run_stage(ctx, "report"); }, nullptr, &what),
            ErrorKind::kMissingUpstreamArtifact);
  EXPECT_NE(what.find("'train'"), std::string::npos) << what;
}

TEST_F(PipelineTest, FailingStageKeepsPartialArtifacts) {
  auto ctx = context();
  const fs::path lexicon = scratch_ / "small_lexicon.txt";
  fs::create_directories(scratch_);
  text::write_file(lexicon.string(), "sad\tsadness\t1\nhappy\tjoy\t1\n");
  ctx.config.paths.emotion_lexicon = lexicon;
  run_stage(ctx, "ingest");
  std::string stage;
  EXPECT_EQ(stage_error_kind([&] { run_stage(ctx, "emotions"); }, &stage), ErrorKind::kMTooLarge);
  EXPECT_EQ(stage, "emotions");
  EXPECT_TRUE(fs::is_regular_file(ctx.stage_dir("emotions") / "config.json"));
  EXPECT_FALSE(fs::exists(ctx.stage_dir("emotions") / "manifest.json"));
}

TEST_F(PipelineTest, CdfTableIsMonotone) {
  const auto ctx = context();
  run_stage(ctx, "ingest");
  std::ostringstream printed;
  run_stage(ctx, "cdf", &printed);
  EXPECT_EQ(printed.str(), text::read_file((ctx.stage_dir("cdf") / "cdf.csv").string()));
  const auto table = csv::parse(printed.str(), "cdf");
  ASSERT_GE(table.rows.size(), 2u);
  double prev = 0;
  int prev_k = 0;
  for (const auto& row : table.rows) {
    const int k = *text::parse_int<int>(row[0]);
    const double v = *text::parse_double(row[2]);
    EXPECT_EQ(k, prev_k + 1);
    EXPECT_GE(v, prev);
    EXPECT_LE(v, 1.0);
    prev = v;
    prev_k = k;
  }
  EXPECT_DOUBLE_EQ(prev, 1.0);
}

TEST_F(PipelineTest, ReportHasTheFourTableLayout) {
  auto ctx = context();
  ctx.config.explain.enabled = false;
  run(ctx);
  EXPECT_FALSE(fs::exists(ctx.stage_dir("explain")));
  ReportBundle bundle;
  report(ctx, &bundle);
  std::set<std::string> stems;
  for (const auto& [stem, table] : bundle.tables) stems.insert(stem);
  EXPECT_EQ(stems, (std::set<std::string>{"table_combined", "table_network", "table_emotion", "table_permuted"}));
  const std::vector<std::string> header{"Target", "Model", "r", "p", "MAE", "Features"};
  for (const char* stem : {"table_combined", "table_network", "table_emotion"}) {
    const auto& t = bundle.tables.at(stem);
    EXPECT_EQ(t.header, header);
    EXPECT_EQ(t.rows.size(), 6u) << stem;
  }
  EXPECT_EQ(bundle.tables.at("table_permuted").rows.size(), 6u);
  EXPECT_EQ(bundle.tables.at("table_combined").rows[0][0], "Social Maladjustment");
  std::size_t headings = 0;
  for (std::size_t pos = 0; (pos = bundle.markdown.find("### ", pos)) != std::string::npos; ++pos) ++headings;
  EXPECT_EQ(headings, 4u);
}

TEST_F(PipelineTest, SubsetRestrictionLimitsTraining) {
  auto ctx = context();
  ctx.config.models.subsets = {FeatureSubset::kEmotion};
  ctx.config.explain.subset = FeatureSubset::kEmotion;
  ctx.config.models.kinds = {ModelKind::kRfr};
  run(ctx);
  const auto summary = nlohmann::json::parse(text::read_file((ctx.stage_dir("train") / "summary.json").string()));
  ASSERT_EQ(summary["results"].size(), 3u);
  for (const auto& row : summary["results"]) {
    EXPECT_EQ(row["subset"], "emotion");
    for (const auto& f : row["features"]) {
      const std::string name = f;
      EXPECT_TRUE(std::find(metrics::kMetricColumns.begin(), metrics::kMetricColumns.end(), name) ==
                  metrics::kMetricColumns.end())
          << name;
    }
  }
  EXPECT_EQ(summary["permuted"].size(), 3u);
  const auto index = nlohmann::json::parse(text::read_file((ctx.stage_dir("explain") / "index.json").string()));
  for (const auto& e : index) {
    EXPECT_EQ(e["model"], "rfr");
    EXPECT_EQ(e["subset"], "emotion");
  }
}

TEST(Sha256Test, KnownDigests) {
  EXPECT_EQ(sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

}  // namespace
}  // namespace tfmn::pipeline
