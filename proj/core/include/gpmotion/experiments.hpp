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

#include <string>

#include "gpmotion/config.hpp"

namespace gpmotion {

// One experiment invocation: the validated config, the content hash recorded
// in every artifact manifest, and the log switch.
struct RunContext {
  ExperimentConfig config;
  std::string config_hash;
  bool quiet = false;
};

// Offline model fit on the fully observed scene: ELBO trace CSV, chosen
// inducing inputs CSV, a reloadable checkpoint, and a summary JSON.
void cmd_fit(const RunContext& ctx);

// Holdout evaluation: for every configured horizon, refit on the remaining
// prefix and score constant-velocity and model extrapolation against the
// ground truth. One summary CSV row per (horizon, method).
void cmd_extrapolate(const RunContext& ctx);

// Full alternating optimization, then Monte Carlo motion uncertainty:
// sparsification curves and their area gap against a seeded random ordering,
// per-pixel uncertainty maps for three frames, and the loss trace.
void cmd_uncertainty(const RunContext& ctx);

// Paired ablation on the same seed: guided (configured guidance weight)
// versus guidance-free. Writes both loss traces, the trajectory error
// comparison, a per-frame series for the most occluded primitive, and
// rendered frames for both arms plus the scripted truth.
void cmd_gpgs(const RunContext& ctx);

}  // namespace gpmotion
