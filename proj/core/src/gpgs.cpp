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

#include "gpmotion/gpgs.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <string>
#include <vector>

#include "gpmotion/errors.hpp"
#include "gpmotion/inducing.hpp"

namespace gpmotion {

namespace {

double percentile_value(const VecX& values, double percentile) {
  std::vector<double> sorted(values.data(), values.data() + values.size());
  std::sort(sorted.begin(), sorted.end());
  const double rank = percentile / 100.0 * (sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(rank));
  if (lo + 1 >= sorted.size()) return sorted.back();
  const double frac = rank - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                       start)
      .count();
}

}  // namespace

ConfidentSubset select_confident(const std::vector<Vec3>& canonical,
                                 const std::vector<double>& times,
                                 const MatX& state, const VecX& confidence,
                                 double percentile) {
  const int n = static_cast<int>(canonical.size());
  const int frames = static_cast<int>(times.size());
  if (n < 1 || frames < 1) throw ConfigError("empty scene");
  if (state.rows() != static_cast<Eigen::Index>(n) * frames ||
      state.cols() != kOutputDims) {
    throw ConfigError("state shape mismatch");
  }
  if (confidence.size() != n) throw ConfigError("confidence size mismatch");
  if ((confidence.array() < 0.0).any() || !confidence.allFinite()) {
    throw ConfigError("confidence must be finite and non-negative");
  }
  if (percentile < 0.0 || percentile > 100.0) {
    throw ConfigError("percentile outside [0, 100]");
  }
  if (confidence.maxCoeff() <= 0.0) {
    throw NumericalError("no visible primitives");
  }

  ConfidentSubset subset;
  subset.threshold =
      percentile > 0.0 ? percentile_value(confidence, percentile) : 0.0;
  for (int k = 0; k < n; ++k) {
    if (confidence[k] > subset.threshold) subset.primitive_ids.push_back(k);
  }
  if (subset.primitive_ids.empty()) {
    subset.relaxed = true;
    subset.threshold = 0.0;
    for (int k = 0; k < n; ++k) {
      if (confidence[k] > 0.0) subset.primitive_ids.push_back(k);
    }
  }

  const int m = static_cast<int>(subset.primitive_ids.size());
  subset.data.X.reserve(static_cast<std::size_t>(m) * frames);
  subset.data.Y.resize(static_cast<Eigen::Index>(m) * frames, kOutputDims);
  for (int i = 0; i < m; ++i) {
    const int k = subset.primitive_ids[i];
    for (int s = 0; s < frames; ++s) {
      Vec4 x;
      x << canonical[k], times[s];
      subset.data.X.push_back(x);
      subset.data.Y.row(static_cast<Eigen::Index>(i) * frames + s) =
          state.row(static_cast<Eigen::Index>(k) * frames + s);
    }
  }
  return subset;
}

GuidanceCache refresh_guidance(const SparseGP& gp,
                               const std::vector<Vec3>& canonical,
                               const std::vector<double>& times, int iteration,
                               int refresh_cadence) {
  const int n = static_cast<int>(canonical.size());
  const int frames = static_cast<int>(times.size());
  GuidanceCache cache;
  cache.targets.resize(static_cast<Eigen::Index>(n) * frames, kOutputDims);
  for (int k = 0; k < n; ++k) {
    for (int s = 0; s < frames; ++s) {
      Vec4 x;
      x << canonical[k], times[s];
      cache.targets.row(static_cast<Eigen::Index>(k) * frames + s) =
          gp.predict_mean(x).transpose();
    }
  }
  cache.refreshed_at = iteration;
  cache.refresh_cadence = refresh_cadence;
  return cache;
}

double AnnealSchedule::value(int iteration) const {
  if (!(start > end) || !(end > 0.0) || total_iterations < 1) {
    throw ConfigError("invalid anneal schedule");
  }
  if (iteration < 0 || iteration >= total_iterations) {
    throw ConfigError("iteration outside schedule");
  }
  if (total_iterations == 1) return end;
  const double alpha =
      static_cast<double>(iteration) / (total_iterations - 1);
  return (1.0 - alpha) * start + alpha * end;
}

GuidanceLoss guidance_loss(const MatX& state, const GuidanceCache& cache,
                           double tau_delta, int iteration, MatX* grad) {
  if (cache.targets.size() == 0) throw ConfigError("empty guidance cache");
  if (state.rows() != cache.targets.rows() ||
      state.cols() != cache.targets.cols()) {
    throw ConfigError("state and cache shape mismatch");
  }
  if (tau_delta < 0.0) throw ConfigError("negative threshold");
  if (iteration - cache.refreshed_at > 2 * cache.refresh_cadence) {
    throw NumericalError("stale guidance");
  }

  const double inv = 1.0 / static_cast<double>(state.rows());
  if (grad != nullptr) grad->setZero(state.rows(), state.cols());
  GuidanceLoss result;
  double loss = 0.0;
  for (Eigen::Index r = 0; r < state.rows(); ++r) {
    const auto diff = state.row(r) - cache.targets.row(r);
    if (diff.norm() > tau_delta) {
      ++result.active;
      loss += diff.squaredNorm();
      if (grad != nullptr) grad->row(r) = 2.0 * inv * diff;
    }
  }
  result.loss = loss * inv;
  return result;
}

OptimizationReport run_gpgs(const SyntheticScene& scene,
                            const GpgsConfig& config) {
  if (config.outer_iterations < 1) throw ConfigError("need iterations");
  if (config.refresh_every < 1) throw ConfigError("refresh cadence must be positive");
  if (!(config.lambda_gp >= 0.0) || !std::isfinite(config.lambda_gp)) {
    throw ConfigError("guidance weight must be non-negative");
  }
  if (!(config.tau_delta_start > config.tau_delta_end) ||
      !(config.tau_delta_end > 0.0)) {
    throw ConfigError("threshold schedule must decrease to a positive value");
  }
  if (config.tau_c_percentile < 0.0 || config.tau_c_percentile > 100.0) {
    throw ConfigError("percentile outside [0, 100]");
  }
  if (!(config.learning_rate > 0.0)) throw ConfigError("learning rate must be positive");
  if (config.smoothness_weight < 0.0) throw ConfigError("negative smoothness weight");
  if (config.m_spatial < 1 || config.m_time < 1) {
    throw ConfigError("need at least one inducing point per factor");
  }

  const int n = scene.num_primitives();
  const int frames = scene.num_frames();
  const Eigen::Index rows = static_cast<Eigen::Index>(n) * frames;
  std::vector<Vec3> canonical;
  canonical.reserve(n);
  for (const Primitive& prim : scene.primitives) {
    canonical.push_back(prim.position);
  }

  const auto visible_count = scene.visibility.count();
  if (visible_count == 0) throw NumericalError("no visible observations");
  const double inv_visible = 1.0 / static_cast<double>(visible_count);
  const Eigen::Index smooth_pairs =
      static_cast<Eigen::Index>(n) * (frames - 1);
  const double inv_smooth =
      smooth_pairs > 0 ? 1.0 / static_cast<double>(smooth_pairs) : 0.0;

  MatX state = MatX::Zero(rows, kOutputDims);
  for (Eigen::Index r = 0; r < rows; ++r) {
    state(r, 3) = 1.0;
    state(r, 7) = 1.0;
  }

  const AnnealSchedule anneal{config.tau_delta_start, config.tau_delta_end,
                              config.outer_iterations};
  MatX adam_m = MatX::Zero(rows, kOutputDims);
  MatX adam_v = MatX::Zero(rows, kOutputDims);
  constexpr double kBeta1 = 0.9;
  constexpr double kBeta2 = 0.999;
  constexpr double kEps = 1e-8;

  OptimizationReport report;
  GuidanceCache cache;
  std::optional<SparseGP> model;

  for (int it = 0; it < config.outer_iterations; ++it) {
    if (!config.guidance_free && it % config.refresh_every == 0) {
      const auto stage1_start = std::chrono::steady_clock::now();
      const int round = it / config.refresh_every;

      std::vector<RenderOutput> renders;
      renders.reserve(frames);
      for (int s = 0; s < frames; ++s) {
        std::vector<Primitive> prims = scene.primitives;
        std::vector<Vec9> deformations(n);
        for (int k = 0; k < n; ++k) {
          deformations[k] =
              state.row(static_cast<Eigen::Index>(k) * frames + s)
                  .transpose();
          if (!scene.visibility(k, s)) prims[k].opacity = 0.0;
        }
        renders.push_back(render(prims, deformations, config.camera));
      }
      const VecX conf = confidence(renders, n);
      const ConfidentSubset subset = select_confident(
          canonical, scene.times, state, conf, config.tau_c_percentile);

      std::vector<MatX> trajectories;
      trajectories.reserve(subset.primitive_ids.size());
      for (int id : subset.primitive_ids) {
        MatX traj(frames, 3);
        for (int s = 0; s < frames; ++s) {
          traj.row(s) =
              (canonical[id] +
               state.row(static_cast<Eigen::Index>(id) * frames + s)
                   .head<3>()
                   .transpose())
                  .eval();
        }
        trajectories.push_back(std::move(traj));
      }
      const int m_spatial = std::min(
          config.m_spatial, static_cast<int>(subset.primitive_ids.size()));
      const std::vector<int> landmarks =
          kmeans_landmarks(extract_descriptors(trajectories), m_spatial,
                           substream_seed(config.seed, "gs-init", round));
      std::vector<Vec3> landmark_positions;
      landmark_positions.reserve(landmarks.size());
      for (int idx : landmarks) {
        landmark_positions.push_back(canonical[subset.primitive_ids[idx]]);
      }
      const InducingInit init =
          build_inducing_set(landmark_positions, config.m_time,
                             scene.times.front(), scene.times.back());

      const Normalization normalization = Normalization::fit(subset.data);
      std::vector<Vec4> inducing;
      inducing.reserve(init.points.size());
      for (const Vec4& z : init.points) {
        inducing.push_back(normalization.normalize_input(z));
      }
      SparseGP fresh(SvgpOptions{}, normalization, inducing);
      Rng fit_rng(substream_seed(config.seed, "gs-gp", round));
      const FitReport fit = fresh.fit(subset.data, config.gp_fit, fit_rng);
      report.elbo_traces.push_back(fit.elbo_trace);
      report.final_elbos.push_back(fit.final_elbo);

      cache = refresh_guidance(fresh, canonical, scene.times, it,
                               config.refresh_every);
      model = std::move(fresh);
      report.refresh_iterations.push_back(it);
      report.stage1_seconds += seconds_since(stage1_start);
    }

    const auto stage2_start = std::chrono::steady_clock::now();
    const double tau = anneal.value(it);

    double recon = 0.0;
    MatX grad = MatX::Zero(rows, kOutputDims);
    for (int k = 0; k < n; ++k) {
      for (int s = 0; s < frames; ++s) {
        if (!scene.visibility(k, s)) continue;
        const Eigen::Index r = static_cast<Eigen::Index>(k) * frames + s;
        const Vec3 fitted =
            canonical[k] + state.row(r).head<3>().transpose();
        const Vec3 diff =
            fitted - scene.observations[k].row(s).transpose();
        recon += diff.squaredNorm() * inv_visible;
        grad.row(r).head<3>() += 2.0 * inv_visible * diff.transpose();
      }
    }
    if (config.smoothness_weight > 0.0 && frames > 1) {
      const double w = config.smoothness_weight * inv_smooth;
      for (int k = 0; k < n; ++k) {
        for (int s = 0; s + 1 < frames; ++s) {
          const Eigen::Index r = static_cast<Eigen::Index>(k) * frames + s;
          const auto step = state.row(r + 1) - state.row(r);
          recon += w * step.squaredNorm();
          grad.row(r + 1) += 2.0 * w * step;
          grad.row(r) -= 2.0 * w * step;
        }
      }
    }

    double guidance = 0.0;
    int active = 0;
    if (!config.guidance_free && config.lambda_gp > 0.0) {
      MatX guidance_grad;
      const GuidanceLoss term =
          guidance_loss(state, cache, tau, it, &guidance_grad);
      guidance = term.loss;
      active = term.active;
      grad += config.lambda_gp * guidance_grad;
    }

    const double total = recon + config.lambda_gp * guidance;
    if (!std::isfinite(total)) {
      throw NumericalError("diverged at iteration " + std::to_string(it));
    }

    const int step_count = it + 1;
    adam_m = kBeta1 * adam_m + (1.0 - kBeta1) * grad;
    adam_v = kBeta2 * adam_v +
             (1.0 - kBeta2) * grad.cwiseProduct(grad);
    const double c1 = 1.0 - std::pow(kBeta1, step_count);
    const double c2 = 1.0 - std::pow(kBeta2, step_count);
    state.array() -= config.learning_rate * (adam_m.array() / c1) /
                     ((adam_v.array() / c2).sqrt() + kEps);

    report.total_trace.push_back(total);
    report.recon_trace.push_back(recon);
    report.guidance_trace.push_back(guidance);
    report.tau_trace.push_back(tau);
    report.active_trace.push_back(active);
    report.stage2_seconds += seconds_since(stage2_start);
  }

  report.final_state = std::move(state);
  report.final_gp = std::move(model);
  return report;
}

}  // namespace gpmotion
