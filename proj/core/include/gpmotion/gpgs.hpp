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

#include <optional>
#include <vector>

#include "gpmotion/dataset.hpp"
#include "gpmotion/scene.hpp"
#include "gpmotion/splat.hpp"
#include "gpmotion/svgp.hpp"
#include "gpmotion/types.hpp"

namespace gpmotion {

// Primitives whose accumulated blending weight clears the confidence
// threshold, together with their full deformation history as supervised
// pairs x = (canonical position, t), y = current 9D deformation.
struct ConfidentSubset {
  std::vector<int> primitive_ids;
  TrainingData data;  // primitive-major: rows i * T + s
  double threshold = 0.0;
  // The percentile threshold selected nothing; fell back to confidence > 0.
  bool relaxed = false;
};

// threshold = the given percentile (linear interpolation) of the confidence
// values; percentile 0 means threshold 0, so every rendered primitive
// qualifies. Selection is strict: confidence > threshold. state holds one
// 9D deformation per (primitive, frame), rows k * T + s.
ConfidentSubset select_confident(const std::vector<Vec3>& canonical,
                                 const std::vector<double>& times,
                                 const MatX& state, const VecX& confidence,
                                 double percentile);

// Cached predictive means for every (primitive, frame) pair, refreshed after
// each model fit. Consumers reject a cache older than twice the refresh
// cadence.
struct GuidanceCache {
  MatX targets;  // (N*T) x 9, rows k * T + s
  int refreshed_at = 0;
  int refresh_cadence = 200;
};

GuidanceCache refresh_guidance(const SparseGP& gp,
                               const std::vector<Vec3>& canonical,
                               const std::vector<double>& times, int iteration,
                               int refresh_cadence);

// Linear ramp from start down to end across the run; the final iteration
// lands on end exactly.
struct AnnealSchedule {
  double start = 0.10;
  double end = 0.01;
  int total_iterations = 1;

  double value(int iteration) const;
};

struct GuidanceLoss {
  double loss = 0.0;
  int active = 0;
};

// Mean squared deviation from the cached predictions over the pairs whose
// deviation norm exceeds tau_delta. The gradient treats the indicator as
// constant: 2 * active * (y - target) / (N*T). Throws on a cache older than
// twice its refresh cadence.
GuidanceLoss guidance_loss(const MatX& state, const GuidanceCache& cache,
                           double tau_delta, int iteration,
                           MatX* grad = nullptr);

struct GpgsConfig {
  int outer_iterations = 400;
  int refresh_every = 200;  // Stage-1 cadence
  double lambda_gp = 0.1;
  // Skip every model stage and the guidance term entirely; pure surrogate
  // reconstruction. A lambda_gp = 0 run takes identical optimization steps.
  bool guidance_free = false;
  double tau_delta_start = 0.10;
  double tau_delta_end = 0.01;
  double tau_c_percentile = 50.0;
  double smoothness_weight = 0.01;
  double learning_rate = 1e-2;
  int m_spatial = 6;
  int m_time = 4;
  FitConfig gp_fit;
  Camera camera;
  std::uint64_t seed = 0;
};

struct OptimizationReport {
  std::vector<double> total_trace;
  std::vector<double> recon_trace;
  std::vector<double> guidance_trace;
  std::vector<double> tau_trace;
  std::vector<int> active_trace;
  std::vector<int> refresh_iterations;
  std::vector<std::vector<double>> elbo_traces;  // one per Stage-1 round
  std::vector<double> final_elbos;
  double stage1_seconds = 0.0;
  double stage2_seconds = 0.0;
  MatX final_state;  // (N*T) x 9
  std::optional<SparseGP> final_gp;
};

// Alternating optimization: every refresh_every iterations the confident
// subset is re-selected, the model refit on it under input perturbation, and
// the guidance cache refreshed; in between, the deformation table takes
// adaptive-moment descent steps on
//   L = masked position fit + smoothness + lambda_gp * guidance.
// Model stages draw from their own seed substreams, so the table's update
// sequence is unchanged by lambda_gp = 0 versus guidance_free.
OptimizationReport run_gpgs(const SyntheticScene& scene,
                            const GpgsConfig& config);

}  // namespace gpmotion
