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

#include "gpmotion/experiments.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "gpmotion/errors.hpp"
#include "gpmotion/eval.hpp"
#include "gpmotion/gpgs.hpp"
#include "gpmotion/inducing.hpp"
#include "gpmotion/io.hpp"
#include "gpmotion/splat.hpp"
#include "gpmotion/uncertainty.hpp"
#include "gpmotion/version.hpp"

namespace gpmotion {

namespace {

void log_line(const RunContext& ctx, const std::string& message) {
  if (!ctx.quiet) std::cout << message << "\n";
}

std::string frame_tag(int frame) {
  char buffer[8];
  std::snprintf(buffer, sizeof(buffer), "%03d", frame);
  return buffer;
}

// Creates the output directory on construction; every artifact gets a
// sibling <name>.manifest.json tying it to the config and seed.
class ArtifactWriter {
 public:
  explicit ArtifactWriter(const RunContext& ctx) : ctx_(ctx) {
    std::filesystem::create_directories(ctx.config.output_dir);
  }

  std::string path(const std::string& name) const {
    return (std::filesystem::path(ctx_.config.output_dir) / name).string();
  }

  void manifest(const std::string& name) const {
    nlohmann::ordered_json m;
    m["artifact"] = name;
    m["config_hash"] = ctx_.config_hash;
    m["seed"] = ctx_.config.seed;
    m["version"] = version();
    write_text_file(path(name) + ".manifest.json", m.dump(2) + "\n");
  }

 private:
  const RunContext& ctx_;
};

SyntheticScene make_scene(const ExperimentConfig& config) {
  SceneSpec spec = config.scene;
  spec.seed = substream_seed(config.seed, "scene");
  return generate_scene(spec);
}

// Supervised pairs from the first `frames` frames, visible entries only.
TrainingData observed_data(const SyntheticScene& scene, int frames) {
  TrainingData data;
  std::vector<Vec9> rows;
  for (int k = 0; k < scene.num_primitives(); ++k) {
    const Vec3 canonical = scene.primitives[k].position;
    for (int s = 0; s < frames; ++s) {
      if (!scene.visibility(k, s)) continue;
      Vec4 x;
      x << canonical, scene.times[s];
      data.X.push_back(x);
      Vec9 y;
      y.head<3>() = scene.observations[k].row(s).transpose() - canonical;
      y.tail<6>() = scene.rotations6d[k].row(s).transpose();
      rows.push_back(y);
    }
  }
  if (rows.empty()) throw NumericalError("no visible observations");
  data.Y.resize(static_cast<Eigen::Index>(rows.size()), kOutputDims);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    data.Y.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
  }
  return data;
}

InducingInit make_inducing(const ExperimentConfig& config,
                           const SyntheticScene& scene, int frames,
                           std::uint64_t init_seed) {
  std::vector<MatX> prefix;
  prefix.reserve(scene.num_primitives());
  for (const MatX& traj : scene.observations) {
    prefix.push_back(traj.topRows(frames));
  }
  std::vector<Vec3> canonical;
  canonical.reserve(scene.num_primitives());
  for (const Primitive& prim : scene.primitives) {
    canonical.push_back(prim.position);
  }
  const std::vector<double> times(scene.times.begin(),
                                  scene.times.begin() + frames);

  if (config.inducing_variant == InducingVariant::TimeSeries) {
    const int m_spatial =
        std::min(config.m_spatial, scene.num_primitives());
    const std::vector<int> landmarks = kmeans_landmarks(
        extract_descriptors(prefix), m_spatial, init_seed);
    std::vector<Vec3> positions;
    positions.reserve(landmarks.size());
    for (int idx : landmarks) positions.push_back(canonical[idx]);
    return build_inducing_set(positions, config.m_time, times.front(),
                              times.back());
  }
  const BaselineInitKind kind =
      config.inducing_variant == InducingVariant::Random
          ? BaselineInitKind::Random
          : BaselineInitKind::VelocityKnn;
  return baseline_init(prefix, times, canonical, config.m_spatial,
                       config.m_time, kind, init_seed);
}

struct FittedModel {
  SparseGP gp;
  FitReport report;
};

FittedModel fit_model(const ExperimentConfig& config, const TrainingData& data,
                      const InducingInit& init, std::uint64_t fit_seed) {
  const Normalization normalization = Normalization::fit(data);
  std::vector<Vec4> inducing;
  inducing.reserve(init.points.size());
  for (const Vec4& z : init.points) {
    inducing.push_back(normalization.normalize_input(z));
  }
  SvgpOptions options;
  options.kernel = config.kernel;
  options.mean = config.mean;
  options.noise_variance = config.noise_variance_init;
  SparseGP gp(options, normalization, inducing);
  Rng rng(fit_seed);
  FitReport report = gp.fit(data, config.fit, rng);
  return {std::move(gp), std::move(report)};
}

GpgsConfig make_gpgs_config(const ExperimentConfig& config) {
  GpgsConfig g;
  g.outer_iterations = config.outer_iterations;
  g.refresh_every = config.n_gp;
  g.lambda_gp = config.lambda_gp;
  g.tau_delta_start = config.tau_delta_start;
  g.tau_delta_end = config.tau_delta_end;
  g.tau_c_percentile = config.tau_c_percentile;
  g.smoothness_weight = config.smoothness_weight;
  g.learning_rate = config.state_learning_rate;
  g.m_spatial = config.m_spatial;
  g.m_time = config.m_time;
  g.gp_fit = config.fit;
  g.camera = config.camera;
  g.seed = config.seed;
  return g;
}

void write_loss_trace(const ArtifactWriter& artifacts, const std::string& name,
                      const OptimizationReport& report) {
  CsvWriter csv(artifacts.path(name),
                {"iteration", "total", "recon", "guidance", "tau_delta",
                 "active"});
  for (std::size_t i = 0; i < report.total_trace.size(); ++i) {
    csv.write_row({static_cast<double>(i), report.total_trace[i],
                   report.recon_trace[i], report.guidance_trace[i],
                   report.tau_trace[i],
                   static_cast<double>(report.active_trace[i])});
  }
  artifacts.manifest(name);
}

struct StateMse {
  double overall = 0.0;
  double hidden = std::numeric_limits<double>::quiet_NaN();
};

// Mean squared trajectory error of a fitted deformation table against the
// noiseless ground truth, overall and over the occluded pairs.
StateMse state_mse(const SyntheticScene& scene, const MatX& state) {
  StateMse result;
  double hidden_sum = 0.0;
  Eigen::Index hidden_count = 0;
  double total_sum = 0.0;
  const int frames = scene.num_frames();
  for (int k = 0; k < scene.num_primitives(); ++k) {
    const Vec3 canonical = scene.primitives[k].position;
    for (int s = 0; s < frames; ++s) {
      const Vec3 fitted =
          canonical + state.row(static_cast<Eigen::Index>(k) * frames + s)
                          .head<3>()
                          .transpose();
      const double err =
          (fitted - scene.trajectories[k].row(s).transpose()).squaredNorm();
      total_sum += err;
      if (!scene.visibility(k, s)) {
        hidden_sum += err;
        ++hidden_count;
      }
    }
  }
  result.overall =
      total_sum / static_cast<double>(scene.num_primitives() * frames);
  if (hidden_count > 0) {
    result.hidden = hidden_sum / static_cast<double>(hidden_count);
  }
  return result;
}

// Renders one frame of a fitted deformation table, occluded primitives
// blanked the same way the scripted-truth renderer does.
RenderOutput render_state_frame(const SyntheticScene& scene, const MatX& state,
                                int frame, const Camera& camera,
                                const Vec3& background) {
  const int frames = scene.num_frames();
  std::vector<Primitive> prims = scene.primitives;
  std::vector<Vec9> deformations(scene.num_primitives());
  for (int k = 0; k < scene.num_primitives(); ++k) {
    deformations[k] =
        state.row(static_cast<Eigen::Index>(k) * frames + frame).transpose();
    if (!scene.visibility(k, frame)) prims[k].opacity = 0.0;
  }
  return render(prims, deformations, camera, background);
}

std::vector<int> preview_frames(const SyntheticScene& scene) {
  const int last = scene.num_frames() - 1;
  std::vector<int> frames = {0, scene.num_frames() / 2, last};
  frames.erase(std::unique(frames.begin(), frames.end()), frames.end());
  return frames;
}

}  // namespace

void cmd_fit(const RunContext& ctx) {
  const ExperimentConfig& config = ctx.config;
  const SyntheticScene scene = make_scene(config);
  const TrainingData data = observed_data(scene, scene.num_frames());
  const InducingInit init = make_inducing(
      config, scene, scene.num_frames(), substream_seed(config.seed, "init"));
  log_line(ctx, "fit: " + std::to_string(data.size()) + " pairs, " +
                    std::to_string(init.points.size()) + " inducing inputs");

  const FittedModel fitted =
      fit_model(config, data, init, substream_seed(config.seed, "gp"));

  const ArtifactWriter artifacts(ctx);
  {
    CsvWriter csv(artifacts.path("elbo_trace.csv"), {"iteration", "elbo"});
    for (std::size_t i = 0; i < fitted.report.elbo_trace.size(); ++i) {
      csv.write_row({static_cast<double>(i), fitted.report.elbo_trace[i]});
    }
    artifacts.manifest("elbo_trace.csv");
  }
  {
    CsvWriter csv(artifacts.path("inducing_points.csv"),
                  {"px", "py", "pz", "t"});
    for (const Vec4& z : init.points) {
      csv.write_row({z[0], z[1], z[2], z[3]});
    }
    artifacts.manifest("inducing_points.csv");
  }
  save_checkpoint(fitted.gp, artifacts.path("model.ckpt"));
  artifacts.manifest("model.ckpt");
  {
    nlohmann::ordered_json report;
    report["num_data"] = data.size();
    report["num_inducing"] = init.points.size();
    report["iterations"] = fitted.report.iterations;
    report["epochs"] = fitted.report.epochs;
    report["initial_elbo"] = fitted.report.initial_elbo;
    report["final_elbo"] = fitted.report.final_elbo;
    write_text_file(artifacts.path("fit_report.json"),
                    report.dump(2) + "\n");
    artifacts.manifest("fit_report.json");
  }
  log_line(ctx, "fit: final ELBO " + format_double(fitted.report.final_elbo));
}

void cmd_extrapolate(const RunContext& ctx) {
  const ExperimentConfig& config = ctx.config;
  const SyntheticScene scene = make_scene(config);
  const int total_frames = scene.num_frames();
  const double peak = trajectory_bbox_diagonal(scene.trajectories);

  std::vector<Vec3> canonical;
  for (const Primitive& prim : scene.primitives) {
    canonical.push_back(prim.position);
  }

  const ArtifactWriter artifacts(ctx);
  CsvWriter csv(artifacts.path("extrapolation.csv"),
                {"horizon", "method", "mse", "psnr_db"});

  for (std::size_t i = 0; i < config.horizons.size(); ++i) {
    const int horizon = config.horizons[i];
    const int prefix = total_frames - horizon;
    if (prefix < 4) {
      throw ConfigError("horizon " + std::to_string(horizon) +
                        " leaves fewer than 4 training frames");
    }
    const TrainingData data = observed_data(scene, prefix);
    const InducingInit init =
        make_inducing(config, scene, prefix,
                      substream_seed(config.seed, "init", i));
    const FittedModel fitted = fit_model(
        config, data, init, substream_seed(config.seed, "gp", i));

    const std::vector<double> holdout(scene.times.begin() + prefix,
                                      scene.times.end());
    const MatX gp_rows = gp_extrapolation(fitted.gp, canonical, holdout);

    MatX reference(scene.num_primitives() * horizon, 3);
    MatX gp_positions(scene.num_primitives() * horizon, 3);
    MatX linear_positions(scene.num_primitives() * horizon, 3);
    for (int k = 0; k < scene.num_primitives(); ++k) {
      const MatX linear = linear_extrapolation(
          scene.observations[k].topRows(prefix), horizon);
      for (int h = 0; h < horizon; ++h) {
        const Eigen::Index row = static_cast<Eigen::Index>(k) * horizon + h;
        reference.row(row) = scene.trajectories[k].row(prefix + h);
        gp_positions.row(row) =
            gp_rows.row(row).head<3>() + canonical[k].transpose();
        linear_positions.row(row) = linear.row(h);
      }
    }

    const double mse_linear = mean_squared_error(linear_positions, reference);
    const double mse_gp = mean_squared_error(gp_positions, reference);
    csv.write_row({std::to_string(horizon), "linear",
                   format_double(mse_linear),
                   format_double(psnr(linear_positions, reference, peak))});
    csv.write_row({std::to_string(horizon), "gp", format_double(mse_gp),
                   format_double(psnr(gp_positions, reference, peak))});
    log_line(ctx, "extrapolate: horizon " + std::to_string(horizon) +
                      " mse linear " + format_double(mse_linear) + " gp " +
                      format_double(mse_gp));
  }
  artifacts.manifest("extrapolation.csv");
}

void cmd_uncertainty(const RunContext& ctx) {
  const ExperimentConfig& config = ctx.config;
  const SyntheticScene scene = make_scene(config);
  const int frames = scene.num_frames();
  const int n = scene.num_primitives();

  const OptimizationReport run = run_gpgs(scene, make_gpgs_config(config));
  if (!run.final_gp.has_value()) {
    throw NumericalError("optimization produced no model");
  }
  const SparseGP& gp = *run.final_gp;

  MatX per_pair_uncertainty(n, frames);
  for (int k = 0; k < n; ++k) {
    for (int s = 0; s < frames; ++s) {
      per_pair_uncertainty(k, s) = mc_uncertainty(
          gp, scene.primitives[k], scene.times[s], config.mc_samples,
          substream_seed(config.seed, "mc", static_cast<std::uint64_t>(k),
                         static_cast<std::uint64_t>(s)));
    }
  }

  VecX errors(n);
  for (int k = 0; k < n; ++k) {
    double sum = 0.0;
    const Vec3 canonical = scene.primitives[k].position;
    for (int s = 0; s < frames; ++s) {
      const Vec3 fitted =
          canonical +
          run.final_state.row(static_cast<Eigen::Index>(k) * frames + s)
              .head<3>()
              .transpose();
      sum += (fitted - scene.trajectories[k].row(s).transpose()).squaredNorm();
    }
    errors[k] = sum / frames;
  }
  const VecX gp_uncertainty = per_pair_uncertainty.rowwise().mean();
  VecX random_uncertainty(n);
  Rng baseline_rng(substream_seed(config.seed, "mc-baseline"));
  for (int k = 0; k < n; ++k) random_uncertainty[k] = baseline_rng.uniform();

  const SparsificationCurve gp_curve =
      sparsification_curve(errors, gp_uncertainty);
  const SparsificationCurve random_curve =
      sparsification_curve(errors, random_uncertainty);

  const ArtifactWriter artifacts(ctx);
  write_loss_trace(artifacts, "loss_trace.csv", run);
  const auto write_curve = [&](const std::string& name,
                               const SparsificationCurve& curve) {
    CsvWriter csv(artifacts.path(name), {"fraction", "oracle", "predicted"});
    for (Eigen::Index i = 0; i < curve.fractions.size(); ++i) {
      csv.write_row({curve.fractions[i], curve.oracle[i], curve.predicted[i]});
    }
    artifacts.manifest(name);
  };
  write_curve("sparsification_gp.csv", gp_curve);
  write_curve("sparsification_random.csv", random_curve);
  {
    CsvWriter csv(artifacts.path("ause.csv"),
                  {"method", "ause", "uninformative_ordering"});
    csv.write_row({"gp", format_double(gp_curve.ause),
                   gp_curve.uninformative_ordering ? "1" : "0"});
    csv.write_row({"random", format_double(random_curve.ause),
                   random_curve.uninformative_ordering ? "1" : "0"});
    artifacts.manifest("ause.csv");
  }
  for (int frame : preview_frames(scene)) {
    const RenderOutput out = render_state_frame(
        scene, run.final_state, frame, config.camera, config.background);
    const std::string name = "uncertainty_map_" + frame_tag(frame) + ".pgm";
    write_pgm16(artifacts.path(name),
                render_uncertainty(out, per_pair_uncertainty.col(frame)));
    artifacts.manifest(name);
  }
  {
    nlohmann::ordered_json report;
    report["ause_gp"] = gp_curve.ause;
    report["ause_random"] = random_curve.ause;
    report["uninformative_gp"] = gp_curve.uninformative_ordering;
    report["uninformative_random"] = random_curve.uninformative_ordering;
    report["mean_error"] = errors.mean();
    report["mean_uncertainty"] = gp_uncertainty.mean();
    write_text_file(artifacts.path("uncertainty_report.json"),
                    report.dump(2) + "\n");
    artifacts.manifest("uncertainty_report.json");
  }
  log_line(ctx, "uncertainty: ause gp " + format_double(gp_curve.ause) +
                    " random " + format_double(random_curve.ause));
}

void cmd_gpgs(const RunContext& ctx) {
  const ExperimentConfig& config = ctx.config;
  const SyntheticScene scene = make_scene(config);
  const int frames = scene.num_frames();

  const GpgsConfig guided_config = make_gpgs_config(config);
  GpgsConfig baseline_config = guided_config;
  baseline_config.lambda_gp = 0.0;
  baseline_config.guidance_free = true;

  log_line(ctx, "gpgs: guided arm, guidance weight " +
                    format_double(config.lambda_gp));
  const OptimizationReport guided = run_gpgs(scene, guided_config);
  log_line(ctx, "gpgs: baseline arm, no guidance");
  const OptimizationReport baseline = run_gpgs(scene, baseline_config);

  const StateMse guided_mse = state_mse(scene, guided.final_state);
  const StateMse baseline_mse = state_mse(scene, baseline.final_state);

  const ArtifactWriter artifacts(ctx);
  write_loss_trace(artifacts, "loss_trace_guided.csv", guided);
  write_loss_trace(artifacts, "loss_trace_baseline.csv", baseline);
  {
    CsvWriter csv(artifacts.path("mse_comparison.csv"),
                  {"arm", "overall_mse", "hidden_mse"});
    csv.write_row({"guided", format_double(guided_mse.overall),
                   format_double(guided_mse.hidden)});
    csv.write_row({"baseline", format_double(baseline_mse.overall),
                   format_double(baseline_mse.hidden)});
    artifacts.manifest("mse_comparison.csv");
  }

  // The primitive the occlusion script hides longest anchors the per-frame
  // comparison series.
  int focus = 0;
  int most_hidden = -1;
  for (int k = 0; k < scene.num_primitives(); ++k) {
    int hidden = 0;
    for (int s = 0; s < frames; ++s) {
      if (!scene.visibility(k, s)) ++hidden;
    }
    if (hidden > most_hidden) {
      most_hidden = hidden;
      focus = k;
    }
  }
  {
    const Vec3 canonical = scene.primitives[focus].position;
    CsvWriter csv(
        artifacts.path("trajectory.csv"),
        {"frame", "t", "visible", "truth_x", "truth_y", "truth_z",
         "observed_x", "observed_y", "observed_z", "baseline_x", "baseline_y",
         "baseline_z", "guided_x", "guided_y", "guided_z", "gp_x", "gp_y",
         "gp_z"});
    for (int s = 0; s < frames; ++s) {
      const Eigen::Index row =
          static_cast<Eigen::Index>(focus) * frames + s;
      const Vec3 truth = scene.trajectories[focus].row(s).transpose();
      const Vec3 observed = scene.observations[focus].row(s).transpose();
      const Vec3 fitted_baseline =
          canonical + baseline.final_state.row(row).head<3>().transpose();
      const Vec3 fitted_guided =
          canonical + guided.final_state.row(row).head<3>().transpose();
      Vec3 gp_pos = Vec3::Constant(std::numeric_limits<double>::quiet_NaN());
      if (guided.final_gp.has_value()) {
        Vec4 x;
        x << canonical, scene.times[s];
        gp_pos = canonical + guided.final_gp->predict_mean(x).head<3>();
      }
      csv.write_row({static_cast<double>(s), scene.times[s],
                     scene.visibility(focus, s) ? 1.0 : 0.0, truth[0],
                     truth[1], truth[2], observed[0], observed[1], observed[2],
                     fitted_baseline[0], fitted_baseline[1],
                     fitted_baseline[2], fitted_guided[0], fitted_guided[1],
                     fitted_guided[2], gp_pos[0], gp_pos[1], gp_pos[2]});
    }
    artifacts.manifest("trajectory.csv");
  }
  for (int frame : preview_frames(scene)) {
    const std::string tag = frame_tag(frame);
    const std::string guided_name = "frame_guided_" + tag + ".ppm";
    write_ppm(artifacts.path(guided_name),
              render_state_frame(scene, guided.final_state, frame,
                                 config.camera, config.background));
    artifacts.manifest(guided_name);
    const std::string baseline_name = "frame_baseline_" + tag + ".ppm";
    write_ppm(artifacts.path(baseline_name),
              render_state_frame(scene, baseline.final_state, frame,
                                 config.camera, config.background));
    artifacts.manifest(baseline_name);
    const std::string truth_name = "frame_truth_" + tag + ".ppm";
    write_ppm(artifacts.path(truth_name),
              render_scene_frame(scene, frame, config.camera,
                                 config.background));
    artifacts.manifest(truth_name);
  }
  {
    nlohmann::ordered_json report;
    report["lambda_gp"] = config.lambda_gp;
    report["tau_delta_trace_final"] = guided.tau_trace.back();
    report["tau_delta_end"] = config.tau_delta_end;
    report["refresh_iterations"] = guided.refresh_iterations;
    report["final_elbos"] = guided.final_elbos;
    report["overall_mse_guided"] = guided_mse.overall;
    report["overall_mse_baseline"] = baseline_mse.overall;
    report["hidden_mse_guided"] = guided_mse.hidden;
    report["hidden_mse_baseline"] = baseline_mse.hidden;
    write_text_file(artifacts.path("gpgs_report.json"), report.dump(2) + "\n");
    artifacts.manifest("gpgs_report.json");
  }
  log_line(ctx, "gpgs: hidden mse guided " +
                    format_double(guided_mse.hidden) + " baseline " +
                    format_double(baseline_mse.hidden));
}

}  // namespace gpmotion
