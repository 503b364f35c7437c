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

#include "gpmotion/scene.hpp"
#include "gpmotion/svgp.hpp"

namespace gpmotion {

// Monte Carlo motion uncertainty at (primitive, time): draws num_samples
// deformation vectors from the GP predictive marginals (independent heads),
// deforms the primitive, and returns the trace of the sample covariance of
// the deformed positions. The caller supplies a per-(primitive, time) seed.
double mc_uncertainty(const SparseGP& gp, const Primitive& prim, double t,
                      int num_samples, std::uint64_t seed);

}  // namespace gpmotion
