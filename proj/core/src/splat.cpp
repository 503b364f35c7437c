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

#include "gpmotion/splat.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numeric>

#include "gpmotion/errors.hpp"

namespace gpmotion {

namespace {

constexpr double kDilationFloor = 0.1;  // px^2
constexpr double kCutoffSq = 9.0;       // Three standard deviations.

}  // namespace

void validate_camera(const Camera& cam) {
  if ((cam.basis.transpose() * cam.basis - Mat3::Identity())
          .cwiseAbs()
          .maxCoeff() > 1e-9) {
    throw ConfigError("camera basis not orthonormal");
  }
  if (cam.width < 8 || cam.height < 8) {
    throw ConfigError("image too small");
  }
  if (!(cam.units_per_pixel > 0.0)) {
    throw ConfigError("units_per_pixel must be positive");
  }
  if (!(cam.near_depth < cam.far_depth)) {
    throw ConfigError("near plane must precede far plane");
  }
}

ProjectedSplat project(const Primitive& prim, const Vec9& deformation,
                       const Camera& cam) {
  validate_camera(cam);
  const DeformedPose pose = deform(prim, deformation);
  const Vec3 in_cam = cam.basis.transpose() * pose.position;

  ProjectedSplat splat;
  splat.depth = in_cam.z();
  splat.culled = splat.depth < cam.near_depth || splat.depth > cam.far_depth;
  splat.mean2d = Vec2(cam.width / 2.0 + in_cam.x() / cam.units_per_pixel,
                      cam.height / 2.0 + in_cam.y() / cam.units_per_pixel);

  const Mat3 sigma = assemble_covariance(prim.scale, pose.rotation);
  const Mat3 sigma_cam = cam.basis.transpose() * sigma * cam.basis;
  Mat2 cov = sigma_cam.topLeftCorner<2, 2>() /
             (cam.units_per_pixel * cam.units_per_pixel);
  Eigen::SelfAdjointEigenSolver<Mat2> eig(cov);
  if (eig.eigenvalues().minCoeff() < kDilationFloor) {
    const Vec2 floored = eig.eigenvalues().cwiseMax(kDilationFloor);
    cov = eig.eigenvectors() * floored.asDiagonal() *
          eig.eigenvectors().transpose();
  }
  splat.cov2d = cov;
  return splat;
}

RenderOutput render(const std::vector<Primitive>& prims,
                    const std::vector<Vec9>& deformations, const Camera& cam,
                    const Vec3& background) {
  validate_camera(cam);
  if (prims.size() != deformations.size()) {
    throw ConfigError("primitive and deformation counts differ");
  }
  const int n = static_cast<int>(prims.size());
  const int num_pixels = cam.width * cam.height;

  RenderOutput out;
  out.width = cam.width;
  out.height = cam.height;
  out.color.assign(num_pixels, Vec3::Zero());
  out.alpha = MatX::Zero(cam.height, cam.width);
  out.weights.assign(num_pixels, {});

  std::vector<ProjectedSplat> splats;
  splats.reserve(n);
  std::vector<int> order;
  for (int k = 0; k < n; ++k) {
    splats.push_back(project(prims[k], deformations[k], cam));
    if (!splats.back().culled && prims[k].opacity > 0.0) {
      order.push_back(k);
    }
  }
  // Front to back; stable so depth ties keep the input order.
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return splats[a].depth < splats[b].depth;
  });

  std::vector<double> transmittance(num_pixels, 1.0);
  for (int k : order) {
    const ProjectedSplat& splat = splats[k];
    const double det = splat.cov2d.determinant();
    const Mat2 inv = splat.cov2d.inverse();
    if (!(det > 0.0) || !inv.allFinite()) {
      throw NumericalError("degenerate projected covariance");
    }
    // Conservative pixel box around the 3-sigma ellipse.
    const double rx = 3.0 * std::sqrt(splat.cov2d(0, 0));
    const double ry = 3.0 * std::sqrt(splat.cov2d(1, 1));
    const int x_lo = std::max(0, static_cast<int>(
                                     std::floor(splat.mean2d.x() - rx - 0.5)));
    const int x_hi = std::min(cam.width - 1,
                              static_cast<int>(
                                  std::ceil(splat.mean2d.x() + rx - 0.5)));
    const int y_lo = std::max(0, static_cast<int>(
                                     std::floor(splat.mean2d.y() - ry - 0.5)));
    const int y_hi = std::min(cam.height - 1,
                              static_cast<int>(
                                  std::ceil(splat.mean2d.y() + ry - 0.5)));
    const double alpha_k = prims[k].opacity;
    for (int py = y_lo; py <= y_hi; ++py) {
      for (int px = x_lo; px <= x_hi; ++px) {
        const Vec2 d(px + 0.5 - splat.mean2d.x(), py + 0.5 - splat.mean2d.y());
        const double quad = d.dot(inv * d);
        if (quad > kCutoffSq) continue;
        const double falloff = std::exp(-0.5 * quad);
        const double a = alpha_k * falloff;
        const int idx = py * cam.width + px;
        const double w = transmittance[idx] * a;
        out.weights[idx].emplace_back(k, w);
        out.color[idx] += prims[k].color * w;
        transmittance[idx] *= 1.0 - a;
      }
    }
  }

  for (int py = 0; py < cam.height; ++py) {
    for (int px = 0; px < cam.width; ++px) {
      const int idx = py * cam.width + px;
      out.alpha(py, px) = 1.0 - transmittance[idx];
      if (out.weights[idx].empty()) {
        out.color[idx] = background;
      } else {
        out.color[idx] += background * transmittance[idx];
      }
    }
  }
  return out;
}

RenderOutput render_scene_frame(const SyntheticScene& scene, int frame,
                                const Camera& cam, const Vec3& background) {
  if (frame < 0 || frame >= scene.num_frames()) {
    throw ConfigError("frame index out of range");
  }
  const int n = scene.num_primitives();
  std::vector<Primitive> prims = scene.primitives;
  std::vector<Vec9> deformations(n);
  for (int k = 0; k < n; ++k) {
    Vec9 y;
    y.head<3>() = scene.trajectories[k].row(frame).transpose() -
                  prims[k].position;
    y.tail<6>() = scene.rotations6d[k].row(frame).transpose();
    deformations[k] = y;
    if (!scene.visibility(k, frame)) prims[k].opacity = 0.0;
  }
  return render(prims, deformations, cam, background);
}

VecX confidence(const std::vector<RenderOutput>& frames, int num_primitives) {
  if (frames.empty()) throw ConfigError("no rendered frames");
  if (num_primitives < 1) throw ConfigError("need at least one primitive");
  VecX totals = VecX::Zero(num_primitives);
  for (const RenderOutput& out : frames) {
    for (const auto& pixel : out.weights) {
      for (const auto& [id, w] : pixel) {
        if (id < 0 || id >= num_primitives) {
          throw ConfigError("primitive id out of range");
        }
        totals[id] += w;
      }
    }
  }
  return totals;
}

MatX render_uncertainty(const RenderOutput& out, const VecX& values) {
  if (out.width <= 0 || out.height <= 0) {
    throw ConfigError("empty render output");
  }
  if ((values.array() < 0.0).any() || !values.allFinite()) {
    throw ConfigError("uncertainty values must be finite and non-negative");
  }
  MatX map = MatX::Zero(out.height, out.width);
  for (int py = 0; py < out.height; ++py) {
    for (int px = 0; px < out.width; ++px) {
      double total = 0.0;
      for (const auto& [id, w] : out.weights[py * out.width + px]) {
        if (id < 0 || id >= values.size()) {
          throw ConfigError("primitive id out of range");
        }
        total += values[id] * w;
      }
      map(py, px) = total;
    }
  }
  return map;
}

}  // namespace gpmotion
