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

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <initializer_list>
#include <string>

#include <json.hpp>

#include "gpmotion/errors.hpp"
#include "gpmotion/io.hpp"
#include "gpmotion/math_util.hpp"

namespace gpmotion {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& message) {
  throw ConfigError(path + ": " + message);
}

json parse_json(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1;
    std::size_t column = 1;
    const std::size_t upto =
        std::min<std::size_t>(e.byte > 0 ? e.byte - 1 : 0, text.size());
    for (std::size_t i = 0; i < upto; ++i) {
      if (text[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    throw ConfigError("parse error at line " + std::to_string(line) +
                      ", column " + std::to_string(column) + ": " + e.what());
  }
}

// View over one (possibly absent) JSON object; getters fall back to the
// given default when the key or the whole object is missing.
class Section {
 public:
  Section(const json* node, std::string path)
      : node_(node), path_(std::move(path)) {}

  bool has(const char* key) const {
    return node_ != nullptr && node_->contains(key);
  }

  std::string key_path(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  void allow(std::initializer_list<const char*> keys) const {
    if (node_ == nullptr) return;
    for (auto it = node_->begin(); it != node_->end(); ++it) {
      const bool known =
          std::any_of(keys.begin(), keys.end(),
                      [&](const char* k) { return it.key() == k; });
      if (!known) throw ConfigError("unknown key: " + key_path(it.key()));
    }
  }

  Section child(const char* key) const {
    if (!has(key)) return Section(nullptr, key_path(key));
    const json& j = (*node_)[key];
    if (!j.is_object()) fail(key_path(key), "expected an object");
    return Section(&j, key_path(key));
  }

  double number(const char* key, double fallback) const {
    if (!has(key)) return fallback;
    const json& j = (*node_)[key];
    if (!j.is_number()) fail(key_path(key), "expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) fail(key_path(key), "must be finite");
    return v;
  }

  int integer(const char* key, int fallback) const {
    if (!has(key)) return fallback;
    const json& j = (*node_)[key];
    if (!j.is_number_integer()) fail(key_path(key), "expected an integer");
    return j.get<int>();
  }

  std::uint64_t uinteger(const char* key, std::uint64_t fallback) const {
    if (!has(key)) return fallback;
    const json& j = (*node_)[key];
    if (!j.is_number_unsigned()) {
      fail(key_path(key), "expected a non-negative integer");
    }
    return j.get<std::uint64_t>();
  }

  std::string str(const char* key, const std::string& fallback) const {
    if (!has(key)) return fallback;
    const json& j = (*node_)[key];
    if (!j.is_string()) fail(key_path(key), "expected a string");
    return j.get<std::string>();
  }

  const json* raw(const char* key) const {
    return has(key) ? &(*node_)[key] : nullptr;
  }

 private:
  const json* node_;
  std::string path_;
};

double positive(const Section& s, const char* key, double fallback) {
  const double v = s.number(key, fallback);
  if (!(v > 0.0)) fail(s.key_path(key), "must be positive");
  return v;
}

double non_negative(const Section& s, const char* key, double fallback) {
  const double v = s.number(key, fallback);
  if (v < 0.0) fail(s.key_path(key), "must be non-negative");
  return v;
}

double unit_interval(const Section& s, const char* key, double fallback) {
  const double v = s.number(key, fallback);
  if (v < 0.0 || v > 1.0) fail(s.key_path(key), "must lie in [0, 1]");
  return v;
}

int at_least(const Section& s, const char* key, int fallback, int minimum) {
  const int v = s.integer(key, fallback);
  if (v < minimum) {
    fail(s.key_path(key), "must be at least " + std::to_string(minimum));
  }
  return v;
}

MaternNu parse_nu(const Section& s, const char* key, MaternNu fallback) {
  if (!s.has(key)) return fallback;
  const double v = s.number(key, 0.0);
  if (v == 0.5) return MaternNu::Half;
  if (v == 1.5) return MaternNu::ThreeHalves;
  if (v == 2.5) return MaternNu::FiveHalves;
  fail(s.key_path(key), "expected 0.5, 1.5, or 2.5");
}

template <typename Enum>
Enum parse_enum(const Section& s, const char* key, Enum fallback,
                std::initializer_list<std::pair<const char*, Enum>> table) {
  if (!s.has(key)) return fallback;
  const std::string v = s.str(key, "");
  for (const auto& [name, value] : table) {
    if (v == name) return value;
  }
  std::string expected;
  for (const auto& [name, value] : table) {
    if (!expected.empty()) expected += ", ";
    expected += name;
  }
  fail(s.key_path(key), "expected one of: " + expected);
}

// Reads a constrained positive value and stores it in raw form, keeping the
// existing raw value when the key is absent.
void read_positive_raw(const Section& s, const char* key, double* raw) {
  if (!s.has(key)) return;
  *raw = inv_softplus(positive(s, key, 1.0));
}

void parse_scene(const Section& top, SceneSpec* scene) {
  const Section s = top.child("scene");
  s.allow({"kind", "num_primitives", "num_frames", "observation_noise",
           "cycles", "slider_speed", "ease_in_fraction", "occlusion"});
  scene->kind = parse_enum(s, "kind", scene->kind,
                           {{"windmill", SceneKind::Windmill},
                            {"slider", SceneKind::Slider},
                            {"mixed", SceneKind::Mixed}});
  scene->num_primitives = at_least(s, "num_primitives", scene->num_primitives, 1);
  scene->num_frames = at_least(s, "num_frames", scene->num_frames, 2);
  scene->observation_noise =
      non_negative(s, "observation_noise", scene->observation_noise);
  scene->cycles = positive(s, "cycles", scene->cycles);
  scene->slider_speed = s.number("slider_speed", scene->slider_speed);
  scene->ease_in_fraction =
      unit_interval(s, "ease_in_fraction", scene->ease_in_fraction);
  if (scene->ease_in_fraction >= 1.0) {
    fail(s.key_path("ease_in_fraction"), "must be below 1");
  }

  const Section o = s.child("occlusion");
  o.allow({"fraction", "window_begin", "window_end", "mode"});
  scene->occlusion.fraction =
      unit_interval(o, "fraction", scene->occlusion.fraction);
  scene->occlusion.window_begin =
      at_least(o, "window_begin", scene->occlusion.window_begin, 0);
  scene->occlusion.window_end =
      at_least(o, "window_end", scene->occlusion.window_end, 0);
  scene->occlusion.mode = parse_enum(o, "mode", scene->occlusion.mode,
                                     {{"random", OcclusionMode::Random},
                                      {"spatial_block", OcclusionMode::SpatialBlock}});
  if (scene->occlusion.window_begin > scene->occlusion.window_end ||
      scene->occlusion.window_end > scene->num_frames) {
    fail(o.key_path("window_end"),
         "occlusion window must satisfy 0 <= begin <= end <= num_frames");
  }
}

void parse_axis(const Section& parent, const char* name,
                AxisTemporalParams* axis) {
  const Section a = parent.child(name);
  a.allow({"matern", "periodic"});
  const Section m = a.child("matern");
  m.allow({"variance", "lengthscale"});
  read_positive_raw(m, "variance", &axis->matern.variance_raw);
  read_positive_raw(m, "lengthscale", &axis->matern.lengthscale_raw);
  const Section p = a.child("periodic");
  p.allow({"variance", "lengthscale", "period"});
  read_positive_raw(p, "variance", &axis->periodic.variance_raw);
  read_positive_raw(p, "lengthscale", &axis->periodic.lengthscale_raw);
  read_positive_raw(p, "period", &axis->periodic.period_raw);
}

void parse_kernel(const Section& top, CompositeKernelParams* kernel) {
  const Section k = top.child("kernel");
  k.allow({"variant", "temporal_nu", "spatial", "temporal"});
  kernel->variant = parse_enum(k, "variant", kernel->variant,
                               {{"composite", KernelVariant::Composite},
                                {"joint_matern", KernelVariant::JointMatern},
                                {"rbf_spatial", KernelVariant::RbfSpatial}});
  kernel->temporal_nu = parse_nu(k, "temporal_nu", kernel->temporal_nu);

  const Section sp = k.child("spatial");
  sp.allow({"variance", "lengthscales", "nu"});
  kernel->spatial_nu = parse_nu(sp, "nu", kernel->spatial_nu);
  read_positive_raw(sp, "variance", &kernel->spatial.variance_raw);
  if (const json* ls = sp.raw("lengthscales")) {
    const std::string path = sp.key_path("lengthscales");
    if (!ls->is_array() || ls->size() != 3) {
      fail(path, "expected an array of 3 numbers");
    }
    for (int i = 0; i < 3; ++i) {
      const json& v = (*ls)[i];
      if (!v.is_number()) fail(path, "expected an array of 3 numbers");
      const double value = v.get<double>();
      if (!(value > 0.0)) fail(path, "entries must be positive");
      kernel->spatial.lengthscale_raw[static_cast<std::size_t>(i)] =
          inv_softplus(value);
    }
  }

  const Section t = k.child("temporal");
  t.allow({"x", "y", "z"});
  parse_axis(t, "x", &kernel->axis[0]);
  parse_axis(t, "y", &kernel->axis[1]);
  parse_axis(t, "z", &kernel->axis[2]);
}

void parse_mean(const Section& top, MeanFunctionParams* mean) {
  const Section m = top.child("mean");
  m.allow({"variant", "c", "A", "T", "phi"});
  const MeanVariant variant =
      parse_enum(m, "variant", mean->variant,
                 {{"constant", MeanVariant::Constant},
                  {"periodic", MeanVariant::Periodic}});
  const double c = m.number("c", mean->c);
  if (variant == MeanVariant::Constant) {
    *mean = MeanFunctionParams::constant(c);
    return;
  }
  const double amplitude = m.number("A", mean->amplitude);
  const double period = positive(m, "T", 1.0);
  const double phase = m.number("phi", mean->phase);
  *mean = MeanFunctionParams::periodic(c, amplitude, period, phase);
}

void parse_optimizer(const Section& top, ExperimentConfig* c) {
  const Section o = top.child("optimizer");
  o.allow({"kind", "learning_rate", "lr_decay", "batch_size",
           "inner_iterations", "input_noise_variance", "noise_variance_init",
           "outer_iterations", "n_gp", "lambda_gp", "tau_delta_start",
           "tau_delta_end", "tau_c_percentile", "smoothness_weight",
           "state_learning_rate"});
  c->fit.optimizer = parse_enum(o, "kind", c->fit.optimizer,
                                {{"adam", OptimizerKind::Adam},
                                 {"sgd", OptimizerKind::Sgd}});
  c->fit.learning_rate = positive(o, "learning_rate", c->fit.learning_rate);
  c->fit.lr_decay_per_epoch = o.number("lr_decay", c->fit.lr_decay_per_epoch);
  if (c->fit.lr_decay_per_epoch <= 0.0 || c->fit.lr_decay_per_epoch > 1.0) {
    fail(o.key_path("lr_decay"), "must lie in (0, 1]");
  }
  c->fit.batch_size = at_least(o, "batch_size", c->fit.batch_size, 1);
  c->fit.iterations = at_least(o, "inner_iterations", c->fit.iterations, 1);
  c->fit.input_noise_variance =
      non_negative(o, "input_noise_variance", c->fit.input_noise_variance);
  c->noise_variance_init =
      positive(o, "noise_variance_init", c->noise_variance_init);
  c->outer_iterations = at_least(o, "outer_iterations", c->outer_iterations, 1);
  c->n_gp = at_least(o, "n_gp", c->n_gp, 1);
  c->lambda_gp = non_negative(o, "lambda_gp", c->lambda_gp);
  c->tau_delta_start = positive(o, "tau_delta_start", c->tau_delta_start);
  c->tau_delta_end = positive(o, "tau_delta_end", c->tau_delta_end);
  if (!(c->tau_delta_start > c->tau_delta_end)) {
    fail(o.key_path("tau_delta_start"), "must exceed tau_delta_end");
  }
  c->tau_c_percentile = o.number("tau_c_percentile", c->tau_c_percentile);
  if (c->tau_c_percentile < 0.0 || c->tau_c_percentile > 100.0) {
    fail(o.key_path("tau_c_percentile"), "must lie in [0, 100]");
  }
  c->smoothness_weight =
      non_negative(o, "smoothness_weight", c->smoothness_weight);
  c->state_learning_rate =
      positive(o, "state_learning_rate", c->state_learning_rate);
}

void parse_camera(const Section& top, Camera* camera) {
  const Section s = top.child("camera");
  s.allow({"width", "height", "units_per_pixel", "background", "near_depth",
           "far_depth"});
  camera->width = at_least(s, "width", camera->width, 8);
  camera->height = at_least(s, "height", camera->height, 8);
  camera->units_per_pixel =
      positive(s, "units_per_pixel", camera->units_per_pixel);
  camera->near_depth = s.number("near_depth", camera->near_depth);
  camera->far_depth = s.number("far_depth", camera->far_depth);
  if (!(camera->near_depth < camera->far_depth)) {
    fail(s.key_path("near_depth"), "must be below far_depth");
  }
  if (const json* bg = s.raw("background")) {
    const std::string path = s.key_path("background");
    if (!bg->is_array() || bg->size() != 3) {
      fail(path, "expected an array of 3 numbers");
    }
  }
}

Vec3 parse_background(const Section& top) {
  const Section s = top.child("camera");
  Vec3 bg = Vec3::Zero();
  if (const json* arr = s.raw("background")) {
    for (int i = 0; i < 3; ++i) {
      const json& v = (*arr)[i];
      if (!v.is_number()) {
        fail(s.key_path("background"), "expected an array of 3 numbers");
      }
      bg[i] = v.get<double>();
    }
  }
  return bg;
}

void parse_horizons(const Section& top, const SceneSpec& scene,
                    std::vector<int>* horizons) {
  const json* arr = top.raw("horizons");
  if (arr == nullptr) {
    for (int h : *horizons) {
      if (h >= scene.num_frames) {
        fail("horizons", "horizon " + std::to_string(h) +
                             " leaves no training frames");
      }
    }
    return;
  }
  if (!arr->is_array() || arr->empty()) {
    fail("horizons", "expected a non-empty array of integers");
  }
  horizons->clear();
  for (const json& v : *arr) {
    if (!v.is_number_integer()) {
      fail("horizons", "expected a non-empty array of integers");
    }
    const int h = v.get<int>();
    if (h < 1) fail("horizons", "horizon 0 requests an empty holdout");
    if (h >= scene.num_frames) {
      fail("horizons",
           "horizon " + std::to_string(h) + " leaves no training frames");
    }
    horizons->push_back(h);
  }
}

}  // namespace

ExperimentConfig parse_experiment_config(const std::string& text) {
  const json root = parse_json(text);
  if (!root.is_object()) throw ConfigError("config root must be a JSON object");

  ExperimentConfig c;
  const Section top(&root, "");
  top.allow({"scene", "kernel", "mean", "inducing", "optimizer", "camera",
             "mc_samples", "horizons", "seed", "output_dir"});

  parse_scene(top, &c.scene);
  parse_kernel(top, &c.kernel);
  parse_mean(top, &c.mean);

  const Section ind = top.child("inducing");
  ind.allow({"variant", "m_spatial", "m_time"});
  c.inducing_variant =
      parse_enum(ind, "variant", c.inducing_variant,
                 {{"time_series", InducingVariant::TimeSeries},
                  {"random", InducingVariant::Random},
                  {"velocity_knn", InducingVariant::VelocityKnn}});
  c.m_spatial = at_least(ind, "m_spatial", c.m_spatial, 1);
  c.m_time = at_least(ind, "m_time", c.m_time, 1);

  parse_optimizer(top, &c);
  parse_camera(top, &c.camera);
  c.background = parse_background(top);

  c.mc_samples = at_least(top, "mc_samples", c.mc_samples, 2);
  parse_horizons(top, c.scene, &c.horizons);
  c.seed = top.uinteger("seed", c.seed);
  c.output_dir = top.str("output_dir", c.output_dir);
  if (c.output_dir.empty()) fail("output_dir", "must not be empty");
  return c;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  return parse_experiment_config(read_text_file(path));
}

std::string config_hash(const std::string& text) {
  const std::string canonical = parse_json(text).dump();
  std::uint64_t h = 1469598103934665603ull;
  for (const unsigned char ch : canonical) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buffer[17];
  std::snprintf(buffer, sizeof(buffer), "%016llx",
                static_cast<unsigned long long>(h));
  return std::string(buffer);
}

}  // namespace gpmotion
