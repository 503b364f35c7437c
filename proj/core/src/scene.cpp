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

#include "gpmotion/scene.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "gpmotion/errors.hpp"
#include "gpmotion/rng.hpp"

namespace gpmotion {
namespace {

constexpr double kDegenerateNorm = 1e-8;
constexpr int kBlades = 4;

Vec6 identity_rotation6d() {
  Vec6 r;
  r << 1.0, 0.0, 0.0, 0.0, 1.0, 0.0;
  return r;
}

void validate_spec(const SceneSpec& spec) {
  if (spec.num_primitives < 4) throw ConfigError("need at least 4 primitives");
  if (spec.num_frames < 8) throw ConfigError("need at least 8 frames");
  if (!std::isfinite(spec.observation_noise) || spec.observation_noise < 0.0) {
    throw ConfigError("invalid observation noise");
  }
  if (!std::isfinite(spec.cycles) || spec.cycles <= 0.0) {
    throw ConfigError("invalid cycle count");
  }
  if (!std::isfinite(spec.slider_speed)) throw ConfigError("invalid speed");
  if (!std::isfinite(spec.ease_in_fraction) || spec.ease_in_fraction < 0.0 ||
      spec.ease_in_fraction >= 1.0) {
    throw ConfigError("invalid ease-in fraction");
  }
  const OcclusionSpec& occ = spec.occlusion;
  if (!std::isfinite(occ.fraction) || occ.fraction < 0.0 ||
      occ.fraction > 1.0) {
    throw ConfigError("invalid occlusion fraction");
  }
  if (occ.fraction > 0.0) {
    if (occ.window_begin < 0 || occ.window_end > spec.num_frames ||
        occ.window_begin >= occ.window_end) {
      throw ConfigError("invalid occlusion window");
    }
  }
}

Primitive random_attributes(const Vec3& position, Rng& rng) {
  Primitive prim;
  prim.position = position;
  prim.scale = Vec3(rng.uniform(0.02, 0.06), rng.uniform(0.02, 0.06),
                    rng.uniform(0.02, 0.06));
  prim.opacity = rng.uniform(0.7, 1.0);
  prim.color = Vec3(rng.uniform(0.2, 1.0), rng.uniform(0.2, 1.0),
                    rng.uniform(0.2, 1.0));
  return prim;
}

// Blade primitive k sits at radius indexed by k / kBlades on blade
// k % kBlades; the wheel spins about the z axis through `center`.
void add_windmill(int count, const Vec3& center, double cycles,
                  const std::vector<double>& times, Rng& rng,
                  SyntheticScene* scene) {
  const int slots = (count + kBlades - 1) / kBlades;
  const int frames = static_cast<int>(times.size());
  for (int k = 0; k < count; ++k) {
    const int blade = k % kBlades;
    const int slot = k / kBlades;
    const double radius = 0.3 + 0.7 * (slot + 0.5) / slots;
    const double base = 2.0 * std::numbers::pi * blade / kBlades;
    const double z = rng.uniform(-0.05, 0.05);
    MatX traj(frames, 3);
    MatX rot(frames, 6);
    for (int s = 0; s < frames; ++s) {
      const double theta = 2.0 * std::numbers::pi * cycles * times[s];
      traj(s, 0) = center.x() + radius * std::cos(base + theta);
      traj(s, 1) = center.y() + radius * std::sin(base + theta);
      traj(s, 2) = center.z() + z;
      rot.row(s) << std::cos(theta), std::sin(theta), 0.0, -std::sin(theta),
          std::cos(theta), 0.0;
    }
    scene->primitives.push_back(
        random_attributes(traj.row(0).transpose(), rng));
    scene->trajectories.push_back(std::move(traj));
    scene->rotations6d.push_back(std::move(rot));
  }
}

// Travelled distance: quadratic ramp until t_r, constant speed afterwards;
// continuous with matching one-sided slopes at the joint.
double slider_progress(double t, double speed, double ramp) {
  if (ramp <= 0.0) return speed * t;
  if (t <= ramp) return speed * t * t / (2.0 * ramp);
  return speed * (t - 0.5 * ramp);
}

void add_slider(int count, const Vec3& center, double speed, double ramp,
                const std::vector<double>& times, Rng& rng,
                SyntheticScene* scene) {
  const int frames = static_cast<int>(times.size());
  const Vec3 direction(1.0, 0.0, 0.0);
  for (int k = 0; k < count; ++k) {
    const Vec3 base = center + Vec3(rng.uniform(-0.4, 0.4),
                                    rng.uniform(-0.4, 0.4),
                                    rng.uniform(-0.4, 0.4));
    MatX traj(frames, 3);
    MatX rot(frames, 6);
    for (int s = 0; s < frames; ++s) {
      traj.row(s) =
          (base + direction * slider_progress(times[s], speed, ramp))
              .transpose();
      rot.row(s) = identity_rotation6d().transpose();
    }
    scene->primitives.push_back(
        random_attributes(traj.row(0).transpose(), rng));
    scene->trajectories.push_back(std::move(traj));
    scene->rotations6d.push_back(std::move(rot));
  }
}

void add_static(int count, const std::vector<double>& times, Rng& rng,
                SyntheticScene* scene) {
  const int frames = static_cast<int>(times.size());
  for (int k = 0; k < count; ++k) {
    const Vec3 base(rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0),
                    rng.uniform(-0.3, 0.3));
    MatX traj(frames, 3);
    MatX rot(frames, 6);
    for (int s = 0; s < frames; ++s) {
      traj.row(s) = base.transpose();
      rot.row(s) = identity_rotation6d().transpose();
    }
    scene->primitives.push_back(random_attributes(base, rng));
    scene->trajectories.push_back(std::move(traj));
    scene->rotations6d.push_back(std::move(rot));
  }
}

void apply_occlusion(const SceneSpec& spec, SyntheticScene* scene) {
  const int n = scene->num_primitives();
  const int frames = scene->num_frames();
  scene->visibility.setConstant(n, frames, true);
  const OcclusionSpec& occ = spec.occlusion;
  if (occ.fraction <= 0.0) return;
  const int count =
      std::min(n, static_cast<int>(std::ceil(occ.fraction * n)));
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  if (occ.mode == OcclusionMode::SpatialBlock) {
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      return scene->primitives[a].position.x() >
             scene->primitives[b].position.x();
    });
  } else {
    Rng rng(substream_seed(spec.seed, "occlusion"));
    for (int i = 0; i < count; ++i) {
      const int j = i + static_cast<int>(rng.uniform_int(n - i));
      std::swap(order[i], order[j]);
    }
  }
  for (int i = 0; i < count; ++i) {
    for (int s = occ.window_begin; s < occ.window_end; ++s) {
      scene->visibility(order[i], s) = false;
    }
  }
}

void apply_observation_noise(const SceneSpec& spec, SyntheticScene* scene) {
  scene->observations = scene->trajectories;
  if (spec.observation_noise == 0.0) return;
  Rng rng(substream_seed(spec.seed, "observation-noise"));
  for (MatX& obs : scene->observations) {
    for (Eigen::Index s = 0; s < obs.rows(); ++s) {
      for (Eigen::Index axis = 0; axis < 3; ++axis) {
        obs(s, axis) += rng.normal(0.0, spec.observation_noise);
      }
    }
  }
}

}  // namespace

Mat3 rotation6d_to_matrix(const Vec6& r6) {
  if (!r6.allFinite()) throw NumericalError("degenerate 6D rotation");
  const Vec3 a1 = r6.head<3>();
  const double n1 = a1.norm();
  if (n1 <= kDegenerateNorm) throw NumericalError("degenerate 6D rotation");
  const Vec3 b1 = a1 / n1;
  const Vec3 a2 = r6.tail<3>();
  const Vec3 residual = a2 - b1.dot(a2) * b1;
  const double n2 = residual.norm();
  if (n2 <= kDegenerateNorm) throw NumericalError("degenerate 6D rotation");
  Mat3 m;
  m.col(0) = b1;
  m.col(1) = residual / n2;
  m.col(2) = b1.cross(m.col(1));
  return m;
}

Vec6 matrix_to_rotation6d(const Mat3& rotation) {
  Vec6 r;
  r.head<3>() = rotation.col(0);
  r.tail<3>() = rotation.col(1);
  return r;
}

DeformedPose deform(const Primitive& prim, const Vec9& y) {
  if (!y.allFinite()) throw ConfigError("non-finite deformation");
  DeformedPose pose;
  pose.position = prim.position + y.head<3>();
  pose.rotation = rotation6d_to_matrix(y.tail<6>());
  return pose;
}

Mat3 assemble_covariance(const Vec3& scale, const Mat3& rotation) {
  if (!(scale.array() > 0.0).all()) throw ConfigError("non-positive scale");
  const Mat3 rs = rotation * scale.asDiagonal();
  return rs * rs.transpose();
}

SyntheticScene generate_scene(const SceneSpec& spec) {
  validate_spec(spec);
  SyntheticScene scene;
  scene.observation_noise = spec.observation_noise;
  scene.times.resize(spec.num_frames);
  for (int s = 0; s < spec.num_frames; ++s) {
    scene.times[s] = static_cast<double>(s) / spec.num_frames;
  }

  Rng rng(substream_seed(spec.seed, "geometry"));
  switch (spec.kind) {
    case SceneKind::Windmill:
      add_windmill(spec.num_primitives, Vec3::Zero(), spec.cycles, scene.times,
                   rng, &scene);
      scene.motion = MotionTag::Periodic;
      scene.period = 1.0 / spec.cycles;
      break;
    case SceneKind::Slider:
      add_slider(spec.num_primitives, Vec3::Zero(), spec.slider_speed,
                 spec.ease_in_fraction, scene.times, rng, &scene);
      scene.motion = MotionTag::NonPeriodic;
      break;
    case SceneKind::Mixed: {
      const int third = spec.num_primitives / 3;
      add_windmill(third, Vec3(0.0, 1.5, 0.0), spec.cycles, scene.times, rng,
                   &scene);
      add_slider(third, Vec3(0.0, -1.5, 0.0), spec.slider_speed,
                 spec.ease_in_fraction, scene.times, rng, &scene);
      add_static(spec.num_primitives - 2 * third, scene.times, rng, &scene);
      scene.motion = MotionTag::NonPeriodic;
      break;
    }
  }

  apply_occlusion(spec, &scene);
  apply_observation_noise(spec, &scene);
  return scene;
}

}  // namespace gpmotion
