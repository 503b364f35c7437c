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

#include "gpmotion/uncertainty.hpp"

#include <cmath>

#include "gpmotion/errors.hpp"
#include "gpmotion/rng.hpp"

namespace gpmotion {

double mc_uncertainty(const SparseGP& gp, const Primitive& prim, double t,
                      int num_samples, std::uint64_t seed) {
  if (num_samples < 2) throw ConfigError("need at least two samples");
  const Vec4 query(prim.position.x(), prim.position.y(), prim.position.z(), t);
  const Prediction pred = gp.predict(query);
  Vec9 stddev;
  for (int d = 0; d < kOutputDims; ++d) stddev[d] = std::sqrt(pred.variance[d]);

  // The rotation half of a sampled deformation leaves the center fixed, so
  // only the translation block moves the deformed position.
  Rng rng(seed);
  MatX positions(num_samples, 3);
  for (int s = 0; s < num_samples; ++s) {
    Vec9 y;
    for (int d = 0; d < kOutputDims; ++d) {
      y[d] = pred.mean[d] + stddev[d] * rng.normal();
    }
    positions.row(s) = (prim.position + y.head<3>()).transpose();
  }
  const Eigen::RowVector3d mean = positions.colwise().mean();
  double total = 0.0;
  for (int axis = 0; axis < 3; ++axis) {
    total += (positions.col(axis).array() - mean[axis]).square().sum();
  }
  return total / (num_samples - 1);
}

}  // namespace gpmotion
