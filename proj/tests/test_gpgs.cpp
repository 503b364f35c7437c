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
#include <limits>
#include <vector>

#include "gpmotion/errors.hpp"
#include "gpmotion/gpgs.hpp"
#include "gpmotion/rng.hpp"

using namespace gpmotion;

namespace {

MatX identity_state(int n, int frames) {
  MatX state = MatX::Zero(n * frames, kOutputDims);
  for (int r = 0; r < state.rows(); ++r) {
    state(r, 3) = 1.0;
    state(r, 7) = 1.0;
  }
  return state;
}

GuidanceCache fresh_cache(const MatX& targets, int cadence = 200) {
  GuidanceCache cache;
  cache.targets = targets;
  cache.refreshed_at = 0;
  cache.refresh_cadence = cadence;
  return cache;
}

SceneSpec small_windmill_spec() {
  SceneSpec spec;
  spec.kind = SceneKind::Windmill;
  spec.num_primitives = 8;
  spec.num_frames = 16;
  spec.cycles = 1.0;
  spec.observation_noise = 0.002;
  spec.seed = 5;
  return spec;
}

GpgsConfig small_config() {
  GpgsConfig config;
  config.outer_iterations = 60;
  config.refresh_every = 30;
  config.m_spatial = 3;
  config.m_time = 3;
  config.gp_fit.iterations = 40;
  config.gp_fit.batch_size = 64;
  config.camera.width = 24;
  config.camera.height = 24;
  config.camera.units_per_pixel = 0.12;
  config.seed = 11;
  return config;
}

}  // namespace

TEST_SUITE("gpgs") {

TEST_CASE("anneal schedule interpolates linearly and lands on the end") {
  AnnealSchedule anneal{0.10, 0.01, 101};
  CHECK(anneal.value(0) == 0.10);
  CHECK(anneal.value(100) == 0.01);
  CHECK(anneal.value(50) == doctest::Approx(0.055).epsilon(1e-12));
  for (int it = 1; it < 101; ++it) {
    CHECK(anneal.value(it) <= anneal.value(it - 1));
  }

  AnnealSchedule single{0.10, 0.01, 1};
  CHECK(single.value(0) == 0.01);

  CHECK_THROWS_AS((AnnealSchedule{0.01, 0.10, 10}).value(0), ConfigError);
  CHECK_THROWS_AS((AnnealSchedule{0.10, 0.01, 10}).value(10), ConfigError);
}

TEST_CASE("percentile threshold splits the confidence distribution") {
  const int n = 8;
  const int frames = 3;
  std::vector<Vec3> canonical;
  std::vector<double> times = {0.0, 0.25, 0.5};
  for (int k = 0; k < n; ++k) canonical.push_back(Vec3(k, 0.0, 0.0));
  MatX state = identity_state(n, frames);
  for (int r = 0; r < state.rows(); ++r) state(r, 0) = 0.01 * r;

  VecX conf(n);
  conf << 1.0, 5.0, 3.0, 7.0, 2.0, 8.0, 4.0, 6.0;
  const ConfidentSubset subset =
      select_confident(canonical, times, state, conf, 50.0);
  CHECK(subset.primitive_ids == std::vector<int>{1, 3, 5, 7});
  CHECK(!subset.relaxed);
  CHECK(subset.threshold == doctest::Approx(4.5).epsilon(1e-12));
  REQUIRE(subset.data.size() == 4 * frames);
  // Rows are primitive-major and pull straight from the state table.
  for (int i = 0; i < 4; ++i) {
    const int k = subset.primitive_ids[i];
    for (int s = 0; s < frames; ++s) {
      const Vec4& x = subset.data.X[i * frames + s];
      CHECK((x.head<3>() - canonical[k]).norm() == 0.0);
      CHECK(x[3] == times[s]);
      CHECK((subset.data.Y.row(i * frames + s) - state.row(k * frames + s))
                .norm() == 0.0);
    }
  }

  // Percentile zero keeps every primitive that rendered at all.
  VecX with_zero = conf;
  with_zero[2] = 0.0;
  const ConfidentSubset all =
      select_confident(canonical, times, state, with_zero, 0.0);
  CHECK(all.primitive_ids.size() == 7);
  CHECK(all.threshold == 0.0);

  // Equal confidences leave nothing above the median; the fallback admits
  // everyone and flags the relaxation.
  const ConfidentSubset relaxed = select_confident(
      canonical, times, state, VecX::Constant(n, 2.0), 50.0);
  CHECK(relaxed.relaxed);
  CHECK(relaxed.primitive_ids.size() == n);

  CHECK_THROWS_WITH_AS(
      select_confident(canonical, times, state, VecX::Zero(n), 50.0),
      "no visible primitives", NumericalError);
}

TEST_CASE("guidance loss counts and penalizes only large deviations") {
  const int n = 5;
  const int frames = 4;
  MatX targets = identity_state(n, frames);
  MatX state = targets;
  GuidanceCache cache = fresh_cache(targets);

  GuidanceLoss at_target = guidance_loss(state, cache, 0.05, 10);
  CHECK(at_target.loss == 0.0);
  CHECK(at_target.active == 0);

  // One deviating pair with norm d above the threshold.
  const double d = 0.3;
  state(7, 2) += d;
  MatX grad;
  const GuidanceLoss one = guidance_loss(state, cache, 0.05, 10, &grad);
  CHECK(one.active == 1);
  CHECK(one.loss == doctest::Approx(d * d / (n * frames)).epsilon(1e-12));
  CHECK(grad(7, 2) ==
        doctest::Approx(2.0 * d / (n * frames)).epsilon(1e-12));
  grad(7, 2) = 0.0;
  CHECK(grad.cwiseAbs().maxCoeff() == 0.0);

  // An infinite threshold silences every term.
  const GuidanceLoss silent = guidance_loss(
      state, cache, std::numeric_limits<double>::infinity(), 10);
  CHECK(silent.loss == 0.0);
  CHECK(silent.active == 0);

  // Below-threshold deviations stay inactive.
  const GuidanceLoss below = guidance_loss(state, cache, 0.5, 10);
  CHECK(below.active == 0);
  CHECK(below.loss == 0.0);
}

TEST_CASE("guidance gradient matches frozen-indicator finite differences") {
  Rng rng(77);
  const int n = 3;
  const int frames = 5;
  MatX targets(n * frames, kOutputDims), state(n * frames, kOutputDims);
  for (int r = 0; r < n * frames; ++r) {
    for (int c = 0; c < kOutputDims; ++c) {
      targets(r, c) = rng.normal();
      state(r, c) = targets(r, c) + 0.4 * rng.normal();
    }
  }
  GuidanceCache cache = fresh_cache(targets);
  const double tau = 0.8;  // Keeps every pair safely off the boundary.

  MatX grad;
  guidance_loss(state, cache, tau, 0, &grad);

  // Freeze the indicators at the base state, then difference the quadratic.
  std::vector<bool> active(n * frames);
  for (int r = 0; r < n * frames; ++r) {
    active[r] = (state.row(r) - targets.row(r)).norm() > tau;
  }
  const auto frozen = [&](const MatX& y) {
    double loss = 0.0;
    for (int r = 0; r < n * frames; ++r) {
      if (active[r]) loss += (y.row(r) - targets.row(r)).squaredNorm();
    }
    return loss / (n * frames);
  };
  const double h = 1e-6;
  for (int r = 0; r < n * frames; r += 2) {
    for (int c = 0; c < kOutputDims; c += 3) {
      MatX plus = state, minus = state;
      plus(r, c) += h;
      minus(r, c) -= h;
      const double fd = (frozen(plus) - frozen(minus)) / (2.0 * h);
      const double scale = std::max({1.0, std::abs(fd), std::abs(grad(r, c))});
      CHECK(std::abs(grad(r, c) - fd) / scale < 1e-6);
    }
  }
}

TEST_CASE("raising the threshold never activates more terms") {
  Rng rng(83);
  MatX targets(12, kOutputDims), state(12, kOutputDims);
  for (int r = 0; r < 12; ++r) {
    for (int c = 0; c < kOutputDims; ++c) {
      targets(r, c) = rng.normal();
      state(r, c) = targets(r, c) + 0.3 * rng.normal();
    }
  }
  GuidanceCache cache = fresh_cache(targets);
  int previous = std::numeric_limits<int>::max();
  for (double tau = 0.0; tau < 2.0; tau += 0.05) {
    const int active = guidance_loss(state, cache, tau, 0).active;
    CHECK(active <= previous);
    previous = active;
  }
}

TEST_CASE("a stale cache is rejected") {
  MatX targets = identity_state(2, 3);
  GuidanceCache cache = fresh_cache(targets, 100);
  cache.refreshed_at = 50;
  CHECK_NOTHROW(guidance_loss(targets, cache, 0.1, 250));
  CHECK_THROWS_WITH_AS(guidance_loss(targets, cache, 0.1, 251),
                       "stale guidance", NumericalError);
}

TEST_CASE("guidance term holds its fixed point through pure-guidance steps") {
  MatX targets = identity_state(4, 3);
  MatX state = targets;
  GuidanceCache cache = fresh_cache(targets);
  for (int it = 0; it < 5; ++it) {
    MatX grad;
    const GuidanceLoss g = guidance_loss(state, cache, 0.05, it, &grad);
    CHECK(g.loss == 0.0);
    CHECK(g.active == 0);
    state -= 1e-2 * grad;  // Gradient is exactly zero; nothing moves.
  }
  CHECK((state - targets).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("spatial input perturbation has the configured variance") {
  Rng rng(91);
  const std::vector<Vec4> base = {Vec4(0.3, -0.2, 0.8, 0.5)};
  const int draws = 10000;
  Vec3 sum = Vec3::Zero();
  Vec3 sum_sq = Vec3::Zero();
  for (int i = 0; i < draws; ++i) {
    const auto perturbed = perturb_spatial(base, 0.02, rng);
    REQUIRE(perturbed.size() == 1);
    CHECK(perturbed[0][3] == base[0][3]);
    const Vec3 delta = perturbed[0].head<3>() - base[0].head<3>();
    sum += delta;
    sum_sq += delta.cwiseProduct(delta);
  }
  for (int axis = 0; axis < 3; ++axis) {
    const double mean = sum[axis] / draws;
    const double var = sum_sq[axis] / draws - mean * mean;
    CHECK(var == doctest::Approx(0.02).epsilon(0.1));
  }

  const auto frozen = perturb_spatial(base, 0.0, rng);
  CHECK((frozen[0] - base[0]).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("the alternating loop fits an unoccluded scene to the noise floor") {
  SceneSpec spec = small_windmill_spec();
  const SyntheticScene scene = generate_scene(spec);

  GpgsConfig config = small_config();
  config.guidance_free = true;
  config.outer_iterations = 1500;
  const OptimizationReport report = run_gpgs(scene, config);

  REQUIRE(report.final_state.rows() == 8 * 16);
  double sq = 0.0;
  int count = 0;
  for (int k = 0; k < 8; ++k) {
    for (int s = 0; s < 16; ++s) {
      const Vec3 fitted =
          scene.primitives[k].position +
          report.final_state.row(k * 16 + s).head<3>().transpose();
      const Vec3 target = scene.observations[k].row(s).transpose();
      sq += (fitted - target).squaredNorm();
      count += 3;
    }
  }
  const double residual = std::sqrt(sq / count);
  CHECK(residual < 1.5 * spec.observation_noise);

  // Guidance-free runs carry no model state and empty guidance traces.
  CHECK(!report.final_gp.has_value());
  CHECK(report.elbo_traces.empty());
  for (double g : report.guidance_trace) CHECK(g == 0.0);
}

TEST_CASE("the full loop is deterministic and anneals to the end value") {
  SceneSpec spec = small_windmill_spec();
  spec.occlusion.fraction = 0.25;
  spec.occlusion.window_begin = 8;
  spec.occlusion.window_end = 16;
  const SyntheticScene scene = generate_scene(spec);

  const GpgsConfig config = small_config();
  const OptimizationReport a = run_gpgs(scene, config);
  const OptimizationReport b = run_gpgs(scene, config);

  CHECK((a.final_state - b.final_state).cwiseAbs().maxCoeff() == 0.0);
  REQUIRE(a.total_trace.size() == 60);
  for (std::size_t i = 0; i < a.total_trace.size(); ++i) {
    CHECK(a.total_trace[i] == b.total_trace[i]);
  }

  CHECK(a.refresh_iterations == std::vector<int>{0, 30});
  CHECK(a.elbo_traces.size() == 2);
  CHECK(a.final_gp.has_value());
  REQUIRE(a.tau_trace.size() == 60);
  CHECK(a.tau_trace.front() == config.tau_delta_start);
  CHECK(a.tau_trace.back() == config.tau_delta_end);
  for (std::size_t i = 1; i < a.tau_trace.size(); ++i) {
    CHECK(a.tau_trace[i] <= a.tau_trace[i - 1]);
  }
  CHECK(a.active_trace.size() == 60);
  CHECK(std::isfinite(a.stage1_seconds));
  CHECK(a.stage1_seconds >= 0.0);
}

TEST_CASE("zero guidance weight reproduces the guidance-free trajectory") {
  SceneSpec spec = small_windmill_spec();
  spec.occlusion.fraction = 0.25;
  spec.occlusion.window_begin = 8;
  spec.occlusion.window_end = 16;
  const SyntheticScene scene = generate_scene(spec);

  GpgsConfig with_stages = small_config();
  with_stages.lambda_gp = 0.0;
  GpgsConfig without = small_config();
  without.guidance_free = true;

  const OptimizationReport a = run_gpgs(scene, with_stages);
  const OptimizationReport b = run_gpgs(scene, without);
  CHECK((a.final_state - b.final_state).cwiseAbs().maxCoeff() == 0.0);
  for (std::size_t i = 0; i < a.recon_trace.size(); ++i) {
    CHECK(a.recon_trace[i] == b.recon_trace[i]);
  }
}

TEST_CASE("invalid configurations are rejected") {
  const SyntheticScene scene = generate_scene(small_windmill_spec());
  GpgsConfig config = small_config();
  config.outer_iterations = 0;
  CHECK_THROWS_AS(run_gpgs(scene, config), ConfigError);
  config = small_config();
  config.refresh_every = 0;
  CHECK_THROWS_AS(run_gpgs(scene, config), ConfigError);
  config = small_config();
  config.lambda_gp = -0.5;
  CHECK_THROWS_AS(run_gpgs(scene, config), ConfigError);
  config = small_config();
  config.tau_delta_start = 0.005;  // below the end value
  CHECK_THROWS_AS(run_gpgs(scene, config), ConfigError);
  config = small_config();
  config.tau_c_percentile = 150.0;
  CHECK_THROWS_AS(run_gpgs(scene, config), ConfigError);
}

}  // TEST_SUITE
