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

#include "gpmotion/dataset.hpp"

#include <cmath>
#include <limits>

#include "gpmotion/errors.hpp"

namespace gpmotion {

namespace {
// Degenerate ranges and deviations fall back to unit scaling so that
// constant columns stay numerically exact.
constexpr double kScaleFloor = 1e-12;
}  // namespace

void TrainingData::validate() const {
  if (Y.rows() != size() || (size() > 0 && Y.cols() != kOutputDims)) {
    throw ConfigError("training data size mismatch");
  }
  for (const Vec4& x : X) {
    if (!x.allFinite()) throw ConfigError("training data contains non-finite input");
  }
  if (size() > 0 && !Y.allFinite()) {
    throw ConfigError("training data contains non-finite target");
  }
}

Normalization Normalization::identity() { return Normalization{}; }

Normalization Normalization::fit(const TrainingData& data) {
  data.validate();
  Normalization n;
  if (data.size() == 0) return n;

  Vec4 lo = data.X.front();
  Vec4 hi = data.X.front();
  for (const Vec4& x : data.X) {
    lo = lo.cwiseMin(x);
    hi = hi.cwiseMax(x);
  }
  n.input_offset = lo;
  for (int d = 0; d < 4; ++d) {
    const double range = hi[d] - lo[d];
    n.input_scale[d] = range > kScaleFloor ? range : 1.0;
  }

  n.output_mean = data.Y.colwise().mean();
  for (int j = 0; j < kOutputDims; ++j) {
    const double var =
        (data.Y.col(j).array() - n.output_mean[j]).square().mean();
    const double sd = std::sqrt(var);
    n.output_std[j] = sd > kScaleFloor ? sd : 1.0;
  }
  return n;
}

Vec4 Normalization::normalize_input(const Vec4& x) const {
  return (x - input_offset).cwiseQuotient(input_scale);
}

Vec9 Normalization::normalize_output(const Vec9& y) const {
  return (y - output_mean).cwiseQuotient(output_std);
}

double Normalization::denormalize_mean(double value, int head) const {
  return value * output_std[head] + output_mean[head];
}

double Normalization::denormalize_variance(double value, int head) const {
  return value * output_std[head] * output_std[head];
}

std::vector<Vec4> perturb_spatial(const std::vector<Vec4>& X, double variance,
                                  Rng& rng) {
  if (variance < 0.0 || !std::isfinite(variance)) {
    throw ConfigError("perturbation variance must be finite and non-negative");
  }
  std::vector<Vec4> out = X;
  if (variance == 0.0) return out;
  const double stddev = std::sqrt(variance);
  for (Vec4& x : out) {
    x.head<3>() += rng.normal3(stddev);
  }
  return out;
}

}  // namespace gpmotion
