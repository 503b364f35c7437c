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

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace gpmotion {

// Positive hyperparameters are stored unconstrained and mapped through
// softplus. Both directions are overflow-safe.
inline double softplus(double x) {
  if (x > 30.0) return x;
  return std::log1p(std::exp(x));
}

inline double inv_softplus(double y) {
  if (y > 30.0) return y;
  if (!(y > 0.0))
    throw std::invalid_argument("inv_softplus requires a positive value");
  return std::log(std::expm1(y));
}

inline double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// Linear-interpolation percentile, q in [0, 100]. Does not require sorted
// input; works on a copy.
double percentile(std::vector<double> values, double q);

inline double square(double x) { return x * x; }

}  // namespace gpmotion
