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

#include <utility>
#include <vector>

#include "gpmotion/scene.hpp"
#include "gpmotion/types.hpp"

namespace gpmotion {

// Orthographic camera. Columns of basis are the image x axis, the image y
// axis, and the viewing direction; depth is the coordinate along the third
// column. Pixel (i, j) covers the unit square with center (i + 0.5, j + 0.5),
// and the camera axis pierces the image at (width / 2, height / 2).
struct Camera {
  Mat3 basis = Mat3::Identity();
  int width = 64;
  int height = 64;
  // World units per pixel.
  double units_per_pixel = 0.05;
  double near_depth = -10.0;
  double far_depth = 10.0;
};

// Throws ConfigError unless the basis is orthonormal, both image dimensions
// are at least 8, units_per_pixel is positive, and near_depth < far_depth.
void validate_camera(const Camera& cam);

struct ProjectedSplat {
  Vec2 mean2d = Vec2::Zero();  // Pixel coordinates.
  Mat2 cov2d = Mat2::Identity();  // Pixel^2; smallest eigenvalue >= 0.1.
  double depth = 0.0;
  bool culled = false;
};

// Applies the deformation, maps the center into pixel coordinates, and
// projects the world covariance through the camera basis. The 2D covariance
// eigenvalues are floored at 0.1 px^2 so every splat covers at least a
// fraction of a pixel. Primitives outside [near_depth, far_depth] come back
// with culled set instead of raising.
ProjectedSplat project(const Primitive& prim, const Vec9& deformation,
                       const Camera& cam);

struct RenderOutput {
  int width = 0;
  int height = 0;
  // Row-major pixels: color[y * width + x].
  std::vector<Vec3> color;
  // Accumulated blending weight per pixel, indexed (y, x).
  MatX alpha;
  // Per-pixel list of (primitive index, blending weight), front to back.
  std::vector<std::vector<std::pair<int, double>>> weights;
};

// Alpha-composites the deformed primitives front to back. The weight of
// primitive k at a pixel is opacity_k * G_k times the product of
// (1 - opacity_j * G_j) over primitives j in front of it, where G is the
// splat's Gaussian falloff truncated beyond three standard deviations.
// Depth ties keep the input order. Pixels no splat touches hold exactly the
// background color.
RenderOutput render(const std::vector<Primitive>& prims,
                    const std::vector<Vec9>& deformations, const Camera& cam,
                    const Vec3& background = Vec3::Zero());

// Renders the scripted ground truth of one frame; primitives hidden by the
// occlusion script are rendered with opacity zero.
RenderOutput render_scene_frame(const SyntheticScene& scene, int frame,
                                const Camera& cam,
                                const Vec3& background = Vec3::Zero());

// Total blending weight each primitive contributed across all rendered
// frames. A primitive that never touched a pixel scores exactly zero.
VecX confidence(const std::vector<RenderOutput>& frames, int num_primitives);

// Per-pixel uncertainty map: the weight lists of a finished render contracted
// against one non-negative scalar per primitive. Linear in those values.
MatX render_uncertainty(const RenderOutput& out, const VecX& values);

}  // namespace gpmotion
