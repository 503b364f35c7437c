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

#include <vector>

#include "gpmotion/rng.hpp"
#include "gpmotion/types.hpp"

namespace gpmotion {

// Supervised pairs for the deformation model: spatio-temporal inputs
// (canonical position, time) and 9D deformation targets.
struct TrainingData {
  std::vector<Vec4> X;
  MatX Y;  // N x 9

  Eigen::Index size() const { return static_cast<Eigen::Index>(X.size()); }
  void validate() const;  // sizes match, everything finite
};

// Input min/max scaling to [0, 1] and per-output standardization. Statistics
// come from the training set and are inverted at prediction time.
struct Normalization {
  Vec4 input_offset = Vec4::Zero();
  Vec4 input_scale = Vec4::Ones();
  Vec9 output_mean = Vec9::Zero();
  Vec9 output_std = Vec9::Ones();

  static Normalization identity();
  static Normalization fit(const TrainingData& data);

  Vec4 normalize_input(const Vec4& x) const;
  Vec9 normalize_output(const Vec9& y) const;
  double denormalize_mean(double value, int head) const;
  double denormalize_variance(double value, int head) const;
};

// Adds independent Gaussian noise of the given variance to the three spatial
// coordinates; time never moves. Zero variance returns a bit-identical copy.
std::vector<Vec4> perturb_spatial(const std::vector<Vec4>& X, double variance,
                                  Rng& rng);

}  // namespace gpmotion
