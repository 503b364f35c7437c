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

#include <doctest.h>

#include <cmath>
#include <vector>

#include "gpmotion/errors.hpp"
#include "gpmotion/rng.hpp"
#include "gpmotion/uncertainty.hpp"

using namespace gpmotion;

namespace {

std::vector<Vec4> grid_inducing(int count, Rng& rng) {
  std::vector<Vec4> z;
  for (int i = 0; i < count; ++i) {
    z.emplace_back(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0),
                   rng.uniform(-1.0, 1.0), rng.uniform(0.0, 1.0));
  }
  return z;
}

SparseGP prior_gp(Rng& rng, double noise = 1e-2) {
  SvgpOptions options;
  options.noise_variance = noise;
  return SparseGP(options, Normalization::identity(), grid_inducing(6, rng));
}

}  // namespace

TEST_SUITE("uncertainty") {

TEST_CASE("concentrated posterior gives vanishing uncertainty") {
  Rng rng(41);
  SvgpOptions options;
  // The predictive variance at an inducing point bottoms out at the jitter
  // scale; keep it well under the assertion tolerance.
  options.jitter = 1e-10;
  std::vector<Vec4> z = grid_inducing(5, rng);
  SparseGP gp(options, Normalization::identity(), z);
  // Pin the variational covariance near zero and query an inducing point:
  // the predictive variance collapses and every sample coincides.
  for (int i = 0; i < kOutputDims; ++i) {
    SvgpHead& head = gp.mutable_head(i);
    head.L_raw.setConstant(-60.0);
    int idx = 0;
    for (int r = 0; r < 5; ++r) {
      for (int c = 0; c <= r; ++c) {
        if (r != c) head.L_raw[idx] = 0.0;
        ++idx;
      }
    }
  }
  Primitive prim;
  prim.position = z[2].head<3>();
  const double u = mc_uncertainty(gp, prim, z[2][3], 64, 99);
  CHECK(u >= 0.0);
  CHECK(u < 1e-6);
}

TEST_CASE("prior-state uncertainty matches the closed-form trace") {
  Rng rng(17);
  SparseGP gp = prior_gp(rng);
  Primitive prim;
  prim.position = Vec3(0.2, -0.4, 0.1);
  const double t = 0.35;
  // At the prior state each head's predictive variance is the kernel value
  // at coincident inputs, so the expected trace is three times that; a
  // sample of S draws stays within three standard errors.
  const Vec4 query(prim.position.x(), prim.position.y(), prim.position.z(), t);
  const Prediction pred = gp.predict(query);
  const double expected =
      pred.variance[0] + pred.variance[1] + pred.variance[2];
  const int samples = 256;
  double se = 0.0;
  for (int axis = 0; axis < 3; ++axis) {
    se += 2.0 * pred.variance[axis] * pred.variance[axis] / (samples - 1);
  }
  se = std::sqrt(se);
  const double u = mc_uncertainty(gp, prim, t, samples, 4242);
  CHECK(std::abs(u - expected) < 3.0 * se);
}

TEST_CASE("inflating one translation head inflates the uncertainty") {
  Rng master(29);
  for (int trial = 0; trial < 10; ++trial) {
    Rng rng(substream_seed(7, "mono", trial));
    SparseGP base = prior_gp(rng);
    SparseGP bigger = base;
    // Quadruple the x-translation head's kernel variances; with common
    // random numbers the sampled spread can only grow.
    SvgpHead& head = bigger.mutable_head(0);
    head.kernel.spatial.variance_raw += 2.0;
    for (int axis = 0; axis < 3; ++axis) {
      head.kernel.axis[axis].matern.variance_raw += 2.0;
    }
    Primitive prim;
    prim.position = Vec3(master.uniform(-1.0, 1.0), master.uniform(-1.0, 1.0),
                         master.uniform(-1.0, 1.0));
    const double t = master.uniform(0.0, 1.0);
    const std::uint64_t seed = substream_seed(11, "mc", trial);
    const double u_base = mc_uncertainty(base, prim, t, 128, seed);
    const double u_big = mc_uncertainty(bigger, prim, t, 128, seed);
    CHECK(u_big > u_base);
  }
}

TEST_CASE("uncertainty is reproducible and needs two samples") {
  Rng rng(53);
  SparseGP gp = prior_gp(rng);
  Primitive prim;
  prim.position = Vec3(0.1, 0.2, 0.3);
  const double a = mc_uncertainty(gp, prim, 0.5, 32, 1234);
  const double b = mc_uncertainty(gp, prim, 0.5, 32, 1234);
  CHECK(a == b);
  CHECK_THROWS_AS(mc_uncertainty(gp, prim, 0.5, 1, 0), ConfigError);
}

}  // TEST_SUITE
