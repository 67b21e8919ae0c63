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

// Command-line driver for the TFMN pipeline.
//
//   tfmn run --config run.toml
//   tfmn metrics --config run.toml --seed 7
//   tfmn --config run.toml --stage cdf
//
// Exit status: 0 on success, 2 for configuration or usage errors, 3 when a
// stage fails.

#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "tfmn/config.hpp"
#include "tfmn/pipeline.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitStage = 3;

std::string stage_list() {
  std::string out = "run";
  for (auto s : tfmn::pipeline::kStages) out += "|" + std::string(s);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Textual forma mentis network pipeline"};
  app.set_version_flag("--version", "tfmn 1.0.0");

  std::string command;
  std::string stage;
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string subset;
  std::optional<std::size_t> permute;
  bool quiet = false;

  app.add_option("command", command, "Stage to run (" + stage_list() + "); defaults to run");
  app.add_option("--config,-c", config_path, "TOML configuration file")->required();
  app.add_option("--seed", seed, "Master seed; overrides the config");
  app.add_option("--stage", stage, "Stage to run; same as the positional command");
  app.add_option("--subset", subset, "Feature subset for training and explanation")
      ->check(CLI::IsMember({"combined", "network", "emotion"}));
  app.add_option("--permute", permute, "Permuted-target repetitions");
  app.add_flag("--quiet,-q", quiet, "Suppress progress messages");
  app.footer("Every config key can be overridden from the environment: key models.gbm.loss is read\n"
             "from TFMN_MODELS_GBM_LOSS, network.k from TFMN_NETWORK_K. Values are TOML literals.");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  if (command.empty()) command = stage.empty() ? "run" : stage;
  if (!stage.empty() && stage != command) {
    std::cerr << "error: --stage " << stage << " conflicts with command " << command << "\n";
    return kExitConfig;
  }
  if (command != "run" && !tfmn::pipeline::is_stage(command)) {
    std::cerr << "error: unknown command '" << command << "'; expected one of " << stage_list() << "\n";
    return kExitConfig;
  }

  tfmn::pipeline::Context ctx;
  try {
    ctx.config = tfmn::load_config(config_path, tfmn::environment_overrides());
    if (seed) ctx.config.seed = *seed;
    if (permute) ctx.config.models.n_perm = *permute;
    if (!subset.empty()) {
      const auto s = *tfmn::parse_subset(subset);
      ctx.config.models.subsets = {s};
      ctx.config.explain.subset = s;
    }
    tfmn::validate(ctx.config);
  } catch (const tfmn::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  if (quiet) ctx.log = nullptr;

  try {
    if (command == "run") {
      tfmn::pipeline::run(ctx);
    } else {
      tfmn::pipeline::run_stage(ctx, command, command == "cdf" ? &std::cout : nullptr);
    }
  } catch (const tfmn::pipeline::StageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitStage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitStage;
  }
  return kExitOk;
}
