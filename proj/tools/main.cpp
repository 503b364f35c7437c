/*
 * Copyright 2026 The gpmotion Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <cstdint>
#include <exception>
#include <functional>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "gpmotion/config.hpp"
#include "gpmotion/errors.hpp"
#include "gpmotion/experiments.hpp"
#include "gpmotion/io.hpp"
#include "gpmotion/version.hpp"

namespace {

constexpr int kExitConfigError = 2;
constexpr int kExitNumericalError = 3;

struct CommonFlags {
  std::string config_path;
  std::string out_dir;
  std::int64_t seed = -1;
  bool quiet = false;
};

void add_common_flags(CLI::App* cmd, CommonFlags* flags) {
  cmd->add_option("--config", flags->config_path, "Experiment config (JSON)")
      ->required();
  cmd->add_option("--seed", flags->seed, "Override the config seed");
  cmd->add_option("--out", flags->out_dir, "Override the output directory");
  cmd->add_flag("--quiet", flags->quiet, "Suppress progress output");
}

// Config parsing and overrides happen before any artifact is created, so a
// rejected config never leaves partial output behind.
gpmotion::RunContext make_context(const CommonFlags& flags) {
  const std::string text = gpmotion::read_text_file(flags.config_path);
  gpmotion::RunContext ctx;
  ctx.config = gpmotion::parse_experiment_config(text);
  ctx.config_hash = gpmotion::config_hash(text);
  ctx.quiet = flags.quiet;
  if (flags.seed >= 0) {
    ctx.config.seed = static_cast<std::uint64_t>(flags.seed);
  }
  if (!flags.out_dir.empty()) ctx.config.output_dir = flags.out_dir;
  return ctx;
}

int dispatch(const CommonFlags& flags,
             const std::function<void(const gpmotion::RunContext&)>& command) {
  try {
    command(make_context(flags));
    return 0;
  } catch (const gpmotion::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const gpmotion::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kExitNumericalError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Probabilistic motion modeling on synthetic dynamic scenes"};
  app.set_version_flag("--version", std::string("gpmotion ") +
                                        gpmotion::version());
  app.require_subcommand(1);

  CommonFlags fit_flags;
  CLI::App* fit = app.add_subcommand(
      "fit", "Fit the sparse model offline and save a checkpoint");
  add_common_flags(fit, &fit_flags);

  CommonFlags extrapolate_flags;
  CLI::App* extrapolate = app.add_subcommand(
      "extrapolate", "Holdout evaluation against a constant-velocity baseline");
  add_common_flags(extrapolate, &extrapolate_flags);

  CommonFlags uncertainty_flags;
  CLI::App* uncertainty = app.add_subcommand(
      "uncertainty", "Motion-uncertainty maps and sparsification analysis");
  add_common_flags(uncertainty, &uncertainty_flags);

  CommonFlags gpgs_flags;
  CLI::App* gpgs = app.add_subcommand(
      "gpgs", "Paired guided versus guidance-free optimization");
  add_common_flags(gpgs, &gpgs_flags);

  CLI11_PARSE(app, argc, argv);

  if (fit->parsed()) return dispatch(fit_flags, gpmotion::cmd_fit);
  if (extrapolate->parsed()) {
    return dispatch(extrapolate_flags, gpmotion::cmd_extrapolate);
  }
  if (uncertainty->parsed()) {
    return dispatch(uncertainty_flags, gpmotion::cmd_uncertainty);
  }
  return dispatch(gpgs_flags, gpmotion::cmd_gpgs);
}
