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

#include <Eigen/Core>

namespace gpmotion {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
// Spatio-temporal input (px, py, pz, t).
using Vec4 = Eigen::Vector4d;
// Deformation output: translation (3) followed by a 6D rotation encoding.
using Vec9 = Eigen::Matrix<double, 9, 1>;
using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;
using MatX = Eigen::MatrixXd;
using VecX = Eigen::VectorXd;

// Number of deformation output dimensions (3 translation + 6 rotation).
inline constexpr int kOutputDims = 9;

}  // namespace gpmotion
