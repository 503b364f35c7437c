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
#include <vector>

#include "gpmotion/types.hpp"

namespace gpmotion {

// Per-axis trajectory summary: mean, std, min, max, mean absolute step,
// DFT magnitude at frequencies 1..8, lag-1 autocorrelation.
inline constexpr int kDescriptorFeaturesPerAxis = 14;
inline constexpr int kDescriptorSize = 3 * kDescriptorFeaturesPerAxis;

// Summarizes each T x 3 position series into one fixed-length vector with a
// feature block per spatial axis. Series must share a common length T >= 4.
// Deterministic; primitives are processed independently.
std::vector<VecX> extract_descriptors(const std::vector<MatX>& trajectories);

// Clusters standardized descriptors (k-means++ seeding, Lloyd iterations,
// best inertia over three restarts) and returns, per cluster, the index of
// the member nearest its centroid. Indices are sorted ascending and the
// result is a deterministic function of (descriptors, m_spatial, seed).
std::vector<int> kmeans_landmarks(const std::vector<VecX>& descriptors,
                                  int m_spatial, std::uint64_t seed);

// Inducing-input initialization: spatial landmarks, temporal samples, and
// their Cartesian product.
struct InducingInit {
  std::vector<Vec3> landmark_positions;
  std::vector<double> time_samples;
  // Landmark-major grid: points[i * M_time + j] pairs landmark i with time
  // sample j. Variants without product structure fill only this field.
  std::vector<Vec4> points;
};

// Pairs every landmark with m_time uniformly spaced times across
// [t_lo, t_hi]; a single sample sits at the window midpoint.
InducingInit build_inducing_set(const std::vector<Vec3>& landmarks,
                                int m_time, double t_lo, double t_hi);

enum class BaselineInitKind { Random, VelocityKnn };

// Comparison initializers. Random draws m_spatial * m_time distinct observed
// (position, time) pairs. VelocityKnn reuses the clustering pipeline with
// descriptors reduced to per-axis mean absolute step 3-vectors, pairing the
// elected primitives' canonical positions with uniform times over the
// observed stamps; it requires one canonical position per primitive.
InducingInit baseline_init(const std::vector<MatX>& trajectories,
                           const std::vector<double>& times,
                           const std::vector<Vec3>& canonical_positions,
                           int m_spatial, int m_time, BaselineInitKind kind,
                           std::uint64_t seed);

}  // namespace gpmotion
