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

#include "gpmotion/experiments.hpp"

#include <doctest.h>
#include <unistd.h>

#include <algorithm>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "gpmotion/errors.hpp"
#include "gpmotion/io.hpp"
#include "gpmotion/svgp.hpp"

using namespace gpmotion;
namespace fs = std::filesystem;

namespace {

const char* kTinyConfig = R"({
  "scene": {
    "kind": "windmill",
    "num_primitives": 6,
    "num_frames": 10,
    "observation_noise": 0.003,
    "cycles": 1.0,
    "occlusion": {"fraction": 0.3, "window_begin": 3, "window_end": 7}
  },
  "inducing": {"m_spatial": 3, "m_time": 2},
  "optimizer": {
    "inner_iterations": 20,
    "batch_size": 64,
    "outer_iterations": 30,
    "n_gp": 15
  },
  "camera": {"width": 24, "height": 24, "units_per_pixel": 0.12},
  "mc_samples": 8,
  "horizons": [2],
  "seed": 3
})";

RunContext tiny_context(const std::string& out_dir) {
  RunContext ctx;
  ctx.config = parse_experiment_config(kTinyConfig);
  ctx.config.output_dir = out_dir;
  ctx.config_hash = config_hash(kTinyConfig);
  ctx.quiet = true;
  return ctx;
}

// Unique scratch directory per test case, removed on destruction.
struct ScratchDir {
  fs::path root;
  explicit ScratchDir(const std::string& tag)
      : root(fs::temp_directory_path() /
             ("gpmotion_test_" + tag + "_" +
              std::to_string(static_cast<unsigned>(::getpid())))) {
    fs::remove_all(root);
    fs::create_directories(root);
  }
  ~ScratchDir() { fs::remove_all(root); }
  std::string sub(const std::string& name) const {
    return (root / name).string();
  }
};

std::vector<std::string> text_artifacts(const std::string& dir) {
  std::vector<std::string> names;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (name.ends_with(".csv") || name.ends_with(".json")) {
      names.push_back(name);
    }
  }
  std::sort(names.begin(), names.end());
  return names;
}

}  // namespace

TEST_SUITE_BEGIN("experiments");

TEST_CASE("offline fit writes trace, inducing set, checkpoint, manifests") {
  const ScratchDir scratch("fit");
  const RunContext ctx = tiny_context(scratch.sub("out"));
  cmd_fit(ctx);

  for (const char* name :
       {"elbo_trace.csv", "inducing_points.csv", "model.ckpt",
        "fit_report.json"}) {
    const fs::path artifact = fs::path(ctx.config.output_dir) / name;
    CHECK(fs::exists(artifact));
    const fs::path manifest = artifact.string() + ".manifest.json";
    REQUIRE(fs::exists(manifest));
    const auto parsed =
        nlohmann::json::parse(read_text_file(manifest.string()));
    CHECK(parsed.at("artifact") == name);
    CHECK(parsed.at("config_hash") == ctx.config_hash);
    CHECK(parsed.at("seed") == 3);
    CHECK(parsed.at("version").is_string());
  }

  // The checkpoint reloads into a working model.
  const SparseGP reloaded = load_checkpoint(
      (fs::path(ctx.config.output_dir) / "model.ckpt").string());
  const Prediction p = reloaded.predict(Vec4(0.0, 0.0, 0.0, 0.5));
  CHECK(p.mean.allFinite());
  CHECK(p.variance.allFinite());

  // Trace CSV has one row per iteration plus the header.
  const std::string trace = read_text_file(
      (fs::path(ctx.config.output_dir) / "elbo_trace.csv").string());
  const auto rows = std::count(trace.begin(), trace.end(), '\n');
  CHECK(rows == 1 + ctx.config.fit.iterations);
}

TEST_CASE("identical config and seed reproduce identical artifact bytes") {
  const ScratchDir scratch("determinism");
  for (void (*command)(const RunContext&) :
       {&cmd_fit, &cmd_extrapolate, &cmd_uncertainty, &cmd_gpgs}) {
    RunContext first = tiny_context(scratch.sub("a"));
    RunContext second = tiny_context(scratch.sub("b"));
    command(first);
    command(second);
    const auto names = text_artifacts(first.config.output_dir);
    CHECK(!names.empty());
    CHECK(names == text_artifacts(second.config.output_dir));
    for (const std::string& name : names) {
      const std::string a = read_text_file(
          (fs::path(first.config.output_dir) / name).string());
      const std::string b = read_text_file(
          (fs::path(second.config.output_dir) / name).string());
      CHECK_MESSAGE(a == b, name);
    }
    fs::remove_all(first.config.output_dir);
    fs::remove_all(second.config.output_dir);
  }
}

TEST_CASE("different seeds change the fitted artifacts") {
  const ScratchDir scratch("seed");
  RunContext a = tiny_context(scratch.sub("a"));
  RunContext b = tiny_context(scratch.sub("b"));
  b.config.seed = 4;
  cmd_fit(a);
  cmd_fit(b);
  const std::string trace_a = read_text_file(
      (fs::path(a.config.output_dir) / "elbo_trace.csv").string());
  const std::string trace_b = read_text_file(
      (fs::path(b.config.output_dir) / "elbo_trace.csv").string());
  CHECK(trace_a != trace_b);
}

TEST_CASE("a horizon that exhausts the prefix is a config error") {
  const ScratchDir scratch("horizon");
  RunContext ctx = tiny_context(scratch.sub("out"));
  ctx.config.horizons = {8};  // leaves 2 frames, below the descriptor minimum
  CHECK_THROWS_AS(cmd_extrapolate(ctx), ConfigError);
}

TEST_CASE("ablation report records the annealed threshold endpoint") {
  const ScratchDir scratch("gpgs");
  const RunContext ctx = tiny_context(scratch.sub("out"));
  cmd_gpgs(ctx);
  const auto report = nlohmann::json::parse(read_text_file(
      (fs::path(ctx.config.output_dir) / "gpgs_report.json").string()));
  CHECK(report.at("tau_delta_trace_final").get<double>() ==
        report.at("tau_delta_end").get<double>());
  CHECK(report.at("refresh_iterations").size() == 2);
  // Both arms produce full loss traces.
  for (const char* name : {"loss_trace_guided.csv", "loss_trace_baseline.csv"}) {
    const std::string trace = read_text_file(
        (fs::path(ctx.config.output_dir) / name).string());
    CHECK(std::count(trace.begin(), trace.end(), '\n') ==
          1 + ctx.config.outer_iterations);
  }
}

TEST_SUITE_END();
