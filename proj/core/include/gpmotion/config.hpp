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

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gpmotion/kernels.hpp"
#include "gpmotion/scene.hpp"
#include "gpmotion/splat.hpp"
#include "gpmotion/svgp.hpp"

namespace gpmotion {

enum class InducingVariant { TimeSeries, Random, VelocityKnn };

// Full experiment description parsed from one JSON document. Every key is
// optional and falls back to the defaults below; unknown keys anywhere in
// the tree are rejected. Parsing performs no computation beyond validation.
struct ExperimentConfig {
  SceneSpec scene;  // scene.seed is derived from seed, never parsed
  CompositeKernelParams kernel = CompositeKernelParams::defaults();
  MeanFunctionParams mean = MeanFunctionParams::constant(0.0);
  InducingVariant inducing_variant = InducingVariant::TimeSeries;
  int m_spatial = 6;
  int m_time = 4;
  FitConfig fit;
  double noise_variance_init = 1e-2;
  int outer_iterations = 400;
  int n_gp = 200;  // iterations between model refreshes
  double lambda_gp = 0.1;
  double tau_delta_start = 0.10;
  double tau_delta_end = 0.01;
  double tau_c_percentile = 50.0;
  double smoothness_weight = 0.01;
  double state_learning_rate = 1e-2;
  Camera camera;
  Vec3 background = Vec3::Zero();
  int mc_samples = 64;
  std::vector<int> horizons = {5, 15};
  std::uint64_t seed = 0;
  std::string output_dir = "out";
};

// Parses and validates; throws ConfigError with the offending key path, or
// with line and column for syntax errors.
ExperimentConfig parse_experiment_config(const std::string& text);
ExperimentConfig load_experiment_config(const std::string& path);

// FNV-1a over the canonical (sorted-key, compact) serialization, hex encoded.
// Whitespace and key order in the source text do not affect the hash.
std::string config_hash(const std::string& text);

}  // namespace gpmotion
