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

#include "gpmotion/config.hpp"

#include <doctest.h>

#include <string>

#include "gpmotion/errors.hpp"
#include "gpmotion/math_util.hpp"

using namespace gpmotion;

namespace {

bool throws_mentioning(const std::string& text, const std::string& needle) {
  try {
    parse_experiment_config(text);
  } catch (const ConfigError& e) {
    return std::string(e.what()).find(needle) != std::string::npos;
  }
  return false;
}

}  // namespace

TEST_SUITE_BEGIN("config");

TEST_CASE("empty document yields the documented defaults") {
  const ExperimentConfig c = parse_experiment_config("{}");
  CHECK(c.scene.kind == SceneKind::Windmill);
  CHECK(c.scene.num_primitives == 64);
  CHECK(c.scene.num_frames == 60);
  CHECK(c.scene.observation_noise == 0.0);
  CHECK(c.scene.occlusion.fraction == 0.0);
  CHECK(c.kernel.variant == KernelVariant::Composite);
  CHECK(c.kernel.spatial_nu == MaternNu::ThreeHalves);
  CHECK(c.mean.variant == MeanVariant::Constant);
  CHECK(c.inducing_variant == InducingVariant::TimeSeries);
  CHECK(c.m_spatial == 6);
  CHECK(c.m_time == 4);
  CHECK(c.fit.iterations == 1000);
  CHECK(c.fit.learning_rate == 1e-2);
  CHECK(c.fit.lr_decay_per_epoch == 0.95);
  CHECK(c.fit.batch_size == 5000);
  CHECK(c.fit.input_noise_variance == 0.02);
  CHECK(c.fit.optimizer == OptimizerKind::Adam);
  CHECK(c.outer_iterations == 400);
  CHECK(c.n_gp == 200);
  CHECK(c.lambda_gp == 0.1);
  CHECK(c.tau_delta_start == 0.10);
  CHECK(c.tau_delta_end == 0.01);
  CHECK(c.tau_c_percentile == 50.0);
  CHECK(c.mc_samples == 64);
  CHECK(c.horizons == std::vector<int>{5, 15});
  CHECK(c.seed == 0);
  CHECK(c.output_dir == "out");
}

TEST_CASE("every field parses from explicit values") {
  const std::string text = R"({
    "scene": {
      "kind": "mixed",
      "num_primitives": 12,
      "num_frames": 24,
      "observation_noise": 0.005,
      "cycles": 3.0,
      "slider_speed": 0.5,
      "ease_in_fraction": 0.1,
      "occlusion": {
        "fraction": 0.25,
        "window_begin": 6,
        "window_end": 18,
        "mode": "spatial_block"
      }
    },
    "kernel": {
      "variant": "rbf_spatial",
      "temporal_nu": 0.5,
      "spatial": {"variance": 2.0, "lengthscales": [0.1, 0.2, 0.3], "nu": 2.5},
      "temporal": {
        "y": {
          "matern": {"variance": 0.7, "lengthscale": 0.4},
          "periodic": {"variance": 0.9, "lengthscale": 1.1, "period": 0.5}
        }
      }
    },
    "mean": {"variant": "periodic", "c": 0.2, "A": 0.3, "T": 0.5, "phi": 1.0},
    "inducing": {"variant": "random", "m_spatial": 3, "m_time": 2},
    "optimizer": {
      "kind": "sgd",
      "learning_rate": 0.005,
      "lr_decay": 0.9,
      "batch_size": 128,
      "inner_iterations": 50,
      "input_noise_variance": 0.01,
      "noise_variance_init": 0.02,
      "outer_iterations": 80,
      "n_gp": 40,
      "lambda_gp": 0.2,
      "tau_delta_start": 0.3,
      "tau_delta_end": 0.05,
      "tau_c_percentile": 25.0,
      "smoothness_weight": 0.02,
      "state_learning_rate": 0.02
    },
    "camera": {
      "width": 32,
      "height": 48,
      "units_per_pixel": 0.1,
      "background": [0.1, 0.2, 0.3],
      "near_depth": -4.0,
      "far_depth": 6.0
    },
    "mc_samples": 16,
    "horizons": [2, 7],
    "seed": 99,
    "output_dir": "artifacts"
  })";
  const ExperimentConfig c = parse_experiment_config(text);

  CHECK(c.scene.kind == SceneKind::Mixed);
  CHECK(c.scene.num_primitives == 12);
  CHECK(c.scene.num_frames == 24);
  CHECK(c.scene.observation_noise == 0.005);
  CHECK(c.scene.cycles == 3.0);
  CHECK(c.scene.slider_speed == 0.5);
  CHECK(c.scene.ease_in_fraction == 0.1);
  CHECK(c.scene.occlusion.fraction == 0.25);
  CHECK(c.scene.occlusion.window_begin == 6);
  CHECK(c.scene.occlusion.window_end == 18);
  CHECK(c.scene.occlusion.mode == OcclusionMode::SpatialBlock);

  CHECK(c.kernel.variant == KernelVariant::RbfSpatial);
  CHECK(c.kernel.spatial_nu == MaternNu::FiveHalves);
  CHECK(c.kernel.temporal_nu == MaternNu::Half);
  CHECK(c.kernel.spatial.variance_raw == doctest::Approx(inv_softplus(2.0)));
  CHECK(c.kernel.spatial.lengthscale_raw[1] ==
        doctest::Approx(inv_softplus(0.2)));
  CHECK(c.kernel.axis[1].matern.variance_raw ==
        doctest::Approx(inv_softplus(0.7)));
  CHECK(c.kernel.axis[1].periodic.period_raw ==
        doctest::Approx(inv_softplus(0.5)));
  // Unmentioned axes keep the default initialization.
  const CompositeKernelParams defaults = CompositeKernelParams::defaults();
  CHECK(c.kernel.axis[0].matern.lengthscale_raw ==
        defaults.axis[0].matern.lengthscale_raw);
  CHECK(c.kernel.axis[2].periodic.variance_raw ==
        defaults.axis[2].periodic.variance_raw);

  CHECK(c.mean.variant == MeanVariant::Periodic);
  CHECK(c.mean.c == 0.2);
  CHECK(c.mean.amplitude == 0.3);
  CHECK(c.mean.period_raw == doctest::Approx(inv_softplus(0.5)));
  CHECK(c.mean.phase == 1.0);

  CHECK(c.inducing_variant == InducingVariant::Random);
  CHECK(c.m_spatial == 3);
  CHECK(c.m_time == 2);

  CHECK(c.fit.optimizer == OptimizerKind::Sgd);
  CHECK(c.fit.learning_rate == 0.005);
  CHECK(c.fit.lr_decay_per_epoch == 0.9);
  CHECK(c.fit.batch_size == 128);
  CHECK(c.fit.iterations == 50);
  CHECK(c.fit.input_noise_variance == 0.01);
  CHECK(c.noise_variance_init == 0.02);
  CHECK(c.outer_iterations == 80);
  CHECK(c.n_gp == 40);
  CHECK(c.lambda_gp == 0.2);
  CHECK(c.tau_delta_start == 0.3);
  CHECK(c.tau_delta_end == 0.05);
  CHECK(c.tau_c_percentile == 25.0);
  CHECK(c.smoothness_weight == 0.02);
  CHECK(c.state_learning_rate == 0.02);

  CHECK(c.camera.width == 32);
  CHECK(c.camera.height == 48);
  CHECK(c.camera.units_per_pixel == 0.1);
  CHECK(c.camera.near_depth == -4.0);
  CHECK(c.camera.far_depth == 6.0);

  CHECK(c.mc_samples == 16);
  CHECK(c.horizons == std::vector<int>{2, 7});
  CHECK(c.seed == 99);
  CHECK(c.output_dir == "artifacts");
}

TEST_CASE("unknown keys are rejected with their path") {
  CHECK(throws_mentioning(R"({"scne": {}})", "scne"));
  CHECK(throws_mentioning(R"({"scene": {"primitives": 3}})",
                          "scene.primitives"));
  CHECK(throws_mentioning(
      R"({"kernel": {"spatial": {"varince": 1.0}}})", "kernel.spatial.varince"));
  CHECK(throws_mentioning(R"({"optimizer": {"lr": 0.1}})", "optimizer.lr"));
}

TEST_CASE("syntax errors carry the line number") {
  const std::string text = "{\n  \"scene\": {\n    \"kind\" \"windmill\"\n}}";
  CHECK(throws_mentioning(text, "line 3"));
}

TEST_CASE("type and range violations name the offending key") {
  CHECK(throws_mentioning(R"({"scene": {"num_primitives": "many"}})",
                          "scene.num_primitives"));
  CHECK(throws_mentioning(R"({"scene": {"num_primitives": 0}})",
                          "scene.num_primitives"));
  CHECK(throws_mentioning(R"({"scene": {"num_frames": 1}})",
                          "scene.num_frames"));
  CHECK(throws_mentioning(R"({"scene": {"observation_noise": -0.1}})",
                          "scene.observation_noise"));
  CHECK(throws_mentioning(
      R"({"scene": {"occlusion": {"fraction": 1.5}}})",
      "scene.occlusion.fraction"));
  CHECK(throws_mentioning(
      R"({"scene": {"num_frames": 10, "occlusion": {"fraction": 0.2, "window_begin": 4, "window_end": 12}}})",
      "window"));
  CHECK(throws_mentioning(R"({"kernel": {"variant": "cubic"}})",
                          "kernel.variant"));
  CHECK(throws_mentioning(R"({"kernel": {"spatial": {"nu": 2.0}}})",
                          "kernel.spatial.nu"));
  CHECK(throws_mentioning(R"({"kernel": {"spatial": {"variance": -1.0}}})",
                          "kernel.spatial.variance"));
  CHECK(throws_mentioning(
      R"({"kernel": {"spatial": {"lengthscales": [0.1, 0.2]}}})",
      "kernel.spatial.lengthscales"));
  CHECK(throws_mentioning(R"({"mean": {"variant": "linear"}})",
                          "mean.variant"));
  CHECK(throws_mentioning(
      R"({"mean": {"variant": "periodic", "T": -0.5}})", "mean.T"));
  CHECK(throws_mentioning(R"({"inducing": {"variant": "kmeanz"}})",
                          "inducing.variant"));
  CHECK(throws_mentioning(R"({"inducing": {"m_spatial": 0}})",
                          "inducing.m_spatial"));
  CHECK(throws_mentioning(R"({"optimizer": {"kind": "lbfgs"}})",
                          "optimizer.kind"));
  CHECK(throws_mentioning(R"({"optimizer": {"learning_rate": 0.0}})",
                          "optimizer.learning_rate"));
  CHECK(throws_mentioning(R"({"optimizer": {"lr_decay": 1.5}})",
                          "optimizer.lr_decay"));
  CHECK(throws_mentioning(R"({"optimizer": {"batch_size": 0}})",
                          "optimizer.batch_size"));
  CHECK(throws_mentioning(
      R"({"optimizer": {"tau_delta_start": 0.01, "tau_delta_end": 0.1}})",
      "tau_delta"));
  CHECK(throws_mentioning(R"({"optimizer": {"tau_c_percentile": 101}})",
                          "optimizer.tau_c_percentile"));
  CHECK(throws_mentioning(R"({"optimizer": {"lambda_gp": -0.1}})",
                          "optimizer.lambda_gp"));
  CHECK(throws_mentioning(R"({"camera": {"width": 4}})", "camera"));
  CHECK(throws_mentioning(R"({"camera": {"background": [1.0]}})",
                          "camera.background"));
  CHECK(throws_mentioning(R"({"mc_samples": 1})", "mc_samples"));
  CHECK(throws_mentioning(R"({"horizons": []})", "horizons"));
  CHECK(throws_mentioning(R"({"seed": -1})", "seed"));
  CHECK(throws_mentioning(R"({"output_dir": ""})", "output_dir"));
}

TEST_CASE("horizon zero reports an empty holdout") {
  CHECK(throws_mentioning(R"({"horizons": [5, 0]})", "empty holdout"));
  CHECK(throws_mentioning(
      R"({"scene": {"num_frames": 10}, "horizons": [10]})", "horizon"));
}

TEST_CASE("document root must be an object") {
  CHECK(throws_mentioning("[1, 2]", "object"));
  CHECK(throws_mentioning("42", "object"));
}

TEST_CASE("hash ignores formatting but tracks content") {
  const std::string a = R"({"seed": 7, "scene": {"kind": "slider"}})";
  const std::string b =
      "{\n  \"scene\": {\"kind\": \"slider\"},\n  \"seed\": 7\n}";
  const std::string c = R"({"seed": 8, "scene": {"kind": "slider"}})";
  CHECK(config_hash(a) == config_hash(b));
  CHECK(config_hash(a) != config_hash(c));
  CHECK(config_hash(a).size() == 16);
  for (char ch : config_hash(a)) {
    CHECK(std::string("0123456789abcdef").find(ch) != std::string::npos);
  }
}

TEST_SUITE_END();
