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

#include <Eigen/Geometry>
#include <cstdint>
#include <vector>

#include "gpmotion/types.hpp"

namespace gpmotion {

using Vec6 = Eigen::Matrix<double, 6, 1>;

// Anisotropic splat with canonical pose and appearance.
struct Primitive {
  Vec3 position = Vec3::Zero();
  Eigen::Quaterniond rotation = Eigen::Quaterniond::Identity();
  Vec3 scale = Vec3::Ones();  // per-axis standard deviations, positive
  double opacity = 1.0;       // [0, 1]
  Vec3 color = Vec3::Ones();  // [0, 1] per channel
};

// Maps the 6D rotation encoding (two stacked 3-vectors) to SO(3): normalize
// the first, orthogonalize the second against it, complete with the cross
// product. Invariant to positive scaling of either half.
Mat3 rotation6d_to_matrix(const Vec6& r6);

// First two columns of a rotation matrix, stacked.
Vec6 matrix_to_rotation6d(const Mat3& rotation);

struct DeformedPose {
  Vec3 position;
  Mat3 rotation;
};

// Applies a deformation vector: additive translation in the first three
// entries, replacement orientation decoded from the last six.
DeformedPose deform(const Primitive& prim, const Vec9& y);

// World covariance R diag(scale)^2 R^T of a deformed primitive.
Mat3 assemble_covariance(const Vec3& scale, const Mat3& rotation);

enum class MotionTag { Periodic, NonPeriodic };
enum class SceneKind { Windmill, Slider, Mixed };
enum class OcclusionMode { Random, SpatialBlock };

// Hides ceil(fraction * N) primitives for the frame window [begin, end).
// Random picks the subset from a seeded stream; SpatialBlock removes the
// primitives with the largest canonical x so a coherent region vanishes.
struct OcclusionSpec {
  double fraction = 0.0;
  int window_begin = 0;
  int window_end = 0;
  OcclusionMode mode = OcclusionMode::Random;
};

struct SceneSpec {
  SceneKind kind = SceneKind::Windmill;
  int num_primitives = 64;
  int num_frames = 60;
  double observation_noise = 0.0;  // std of additive position noise
  OcclusionSpec occlusion;
  std::uint64_t seed = 0;
  double cycles = 2.0;             // windmill revolutions per sequence
  double slider_speed = 1.0;       // world units per unit time
  double ease_in_fraction = 0.25;  // leading time fraction with ramped speed
};

// Frames are stamped t_s = s / T so a periodic generator closes its cycle on
// an exact frame boundary.
struct SyntheticScene {
  std::vector<Primitive> primitives;
  std::vector<double> times;
  std::vector<MatX> trajectories;  // noiseless ground truth, T x 3 each
  std::vector<MatX> rotations6d;   // scripted orientation, T x 6 each
  std::vector<MatX> observations;  // trajectories + noise
  Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> visibility;  // N x T
  MotionTag motion = MotionTag::NonPeriodic;
  double observation_noise = 0.0;
  double period = 0.0;  // motion period in time units, 0 when aperiodic

  int num_primitives() const { return static_cast<int>(primitives.size()); }
  int num_frames() const { return static_cast<int>(times.size()); }
};

SyntheticScene generate_scene(const SceneSpec& spec);

}  // namespace gpmotion
