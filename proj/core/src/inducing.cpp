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

#include "gpmotion/inducing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "gpmotion/errors.hpp"
#include "gpmotion/rng.hpp"

namespace gpmotion {
namespace {

constexpr double kVarianceFloor = 1e-12;
constexpr int kLloydIterations = 50;
constexpr int kRestarts = 3;

void validate_trajectories(const std::vector<MatX>& trajectories) {
  if (trajectories.empty()) throw ConfigError("no trajectories");
  const Eigen::Index frames = trajectories.front().rows();
  for (const MatX& traj : trajectories) {
    if (traj.cols() != 3) throw ConfigError("trajectory must be T x 3");
    if (traj.rows() < 4) throw ConfigError("trajectory too short");
    if (traj.rows() != frames) throw ConfigError("trajectory length mismatch");
    if (!traj.allFinite()) throw ConfigError("non-finite trajectory");
  }
}

VecX axis_features(const Eigen::Ref<const VecX>& x) {
  const int n = static_cast<int>(x.size());
  VecX f(kDescriptorFeaturesPerAxis);
  const double mean = x.mean();
  const VecX centered = x.array() - mean;
  f[0] = mean;
  f[1] = std::sqrt(centered.squaredNorm() / n);
  f[2] = x.minCoeff();
  f[3] = x.maxCoeff();
  double step = 0.0;
  for (int s = 0; s + 1 < n; ++s) step += std::abs(x[s + 1] - x[s]);
  f[4] = step / (n - 1);
  for (int k = 1; k <= 8; ++k) {
    double re = 0.0;
    double im = 0.0;
    for (int s = 0; s < n; ++s) {
      const double ang = 2.0 * std::numbers::pi * k * s / n;
      re += x[s] * std::cos(ang);
      im -= x[s] * std::sin(ang);
    }
    f[4 + k] = std::hypot(re, im);
  }
  double lagged = 0.0;
  for (int s = 0; s + 1 < n; ++s) lagged += centered[s] * centered[s + 1];
  const double sq = centered.squaredNorm();
  // Zero-variance series have autocorrelation 0 by convention.
  f[13] = sq < kVarianceFloor ? 0.0 : lagged / sq;
  return f;
}

// Lloyd clustering over raw feature rows. Standardization lives here so all
// callers share one scaling convention; constant features are zeroed rather
// than divided by a vanishing scale. Returns one member index per cluster
// (the one nearest its centroid), sorted ascending.
std::vector<int> cluster_representatives(const MatX& raw, int k,
                                         std::uint64_t seed) {
  const int n = static_cast<int>(raw.rows());
  MatX x = raw;
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const double mean = x.col(j).mean();
    const double sd = std::sqrt((x.col(j).array() - mean).square().sum() / n);
    if (sd < kVarianceFloor) {
      x.col(j).setZero();
    } else {
      x.col(j) = (x.col(j).array() - mean) / sd;
    }
  }
  if (k == n) {
    std::vector<int> all(n);
    std::iota(all.begin(), all.end(), 0);
    return all;
  }

  std::vector<int> best_assign;
  MatX best_centroids;
  double best_inertia = std::numeric_limits<double>::infinity();
  for (int restart = 0; restart < kRestarts; ++restart) {
    Rng rng(substream_seed(seed, "kmeans-restart", restart));
    MatX centroids(k, x.cols());
    VecX d2(n);
    const int first = static_cast<int>(rng.uniform_int(n));
    centroids.row(0) = x.row(first);
    for (int i = 0; i < n; ++i) {
      d2[i] = (x.row(i) - centroids.row(0)).squaredNorm();
    }
    for (int c = 1; c < k; ++c) {
      const double total = d2.sum();
      int pick = -1;
      if (total > 0.0) {
        // Distance-squared weighted draw; zero-width entries are skipped so
        // existing centers can never be re-elected.
        const double u = rng.uniform() * total;
        double cum = 0.0;
        for (int i = 0; i < n; ++i) {
          cum += d2[i];
          if (d2[i] > 0.0 && cum >= u) {
            pick = i;
            break;
          }
        }
        if (pick < 0) {
          for (int i = n - 1; i >= 0; --i) {
            if (d2[i] > 0.0) {
              pick = i;
              break;
            }
          }
        }
      } else {
        // Every point coincides with some center; any index works and the
        // empty-cluster repair below absorbs the duplicates.
        pick = static_cast<int>(rng.uniform_int(n));
      }
      centroids.row(c) = x.row(pick);
      for (int i = 0; i < n; ++i) {
        d2[i] = std::min(d2[i], (x.row(i) - centroids.row(c)).squaredNorm());
      }
    }

    std::vector<int> assign(n, -1);
    std::vector<int> count(k, 0);
    for (int iter = 0; iter < kLloydIterations; ++iter) {
      bool changed = false;
      for (int i = 0; i < n; ++i) {
        int arg = 0;
        double best = std::numeric_limits<double>::infinity();
        for (int c = 0; c < k; ++c) {
          const double d = (x.row(i) - centroids.row(c)).squaredNorm();
          if (d < best) {
            best = d;
            arg = c;
          }
        }
        if (arg != assign[i]) {
          assign[i] = arg;
          changed = true;
        }
      }
      std::fill(count.begin(), count.end(), 0);
      for (int i = 0; i < n; ++i) ++count[assign[i]];
      // Empty clusters adopt the point farthest from its current centroid;
      // with k <= n some cluster always has a spare member.
      for (int c = 0; c < k; ++c) {
        if (count[c] > 0) continue;
        int far = -1;
        double fard = -1.0;
        for (int i = 0; i < n; ++i) {
          if (count[assign[i]] <= 1) continue;
          const double d = (x.row(i) - centroids.row(assign[i])).squaredNorm();
          if (d > fard) {
            fard = d;
            far = i;
          }
        }
        if (far < 0) continue;
        --count[assign[far]];
        assign[far] = c;
        count[c] = 1;
        changed = true;
      }
      MatX sums = MatX::Zero(k, x.cols());
      for (int i = 0; i < n; ++i) sums.row(assign[i]) += x.row(i);
      for (int c = 0; c < k; ++c) centroids.row(c) = sums.row(c) / count[c];
      if (!changed) break;
    }

    double inertia = 0.0;
    for (int i = 0; i < n; ++i) {
      inertia += (x.row(i) - centroids.row(assign[i])).squaredNorm();
    }
    if (inertia < best_inertia) {
      best_inertia = inertia;
      best_assign = assign;
      best_centroids = centroids;
    }
  }

  std::vector<int> reps;
  reps.reserve(k);
  for (int c = 0; c < k; ++c) {
    int rep = -1;
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
      if (best_assign[i] != c) continue;
      const double d = (x.row(i) - best_centroids.row(c)).squaredNorm();
      if (d < best) {
        best = d;
        rep = i;
      }
    }
    if (rep >= 0) reps.push_back(rep);
  }
  std::sort(reps.begin(), reps.end());
  return reps;
}

}  // namespace

std::vector<VecX> extract_descriptors(const std::vector<MatX>& trajectories) {
  validate_trajectories(trajectories);
  std::vector<VecX> descriptors;
  descriptors.reserve(trajectories.size());
  for (const MatX& traj : trajectories) {
    VecX d(kDescriptorSize);
    for (int axis = 0; axis < 3; ++axis) {
      d.segment(axis * kDescriptorFeaturesPerAxis, kDescriptorFeaturesPerAxis) =
          axis_features(traj.col(axis));
    }
    descriptors.push_back(std::move(d));
  }
  return descriptors;
}

std::vector<int> kmeans_landmarks(const std::vector<VecX>& descriptors,
                                  int m_spatial, std::uint64_t seed) {
  if (descriptors.empty()) throw ConfigError("no descriptors");
  if (m_spatial < 1) throw ConfigError("invalid landmark count");
  const int n = static_cast<int>(descriptors.size());
  if (m_spatial > n) throw ConfigError("too many landmarks");
  const Eigen::Index dim = descriptors.front().size();
  if (dim < 1) throw ConfigError("empty descriptor");
  MatX features(n, dim);
  for (int i = 0; i < n; ++i) {
    if (descriptors[i].size() != dim) {
      throw ConfigError("descriptor length mismatch");
    }
    if (!descriptors[i].allFinite()) throw ConfigError("non-finite descriptor");
    features.row(i) = descriptors[i].transpose();
  }
  return cluster_representatives(features, m_spatial, seed);
}

InducingInit build_inducing_set(const std::vector<Vec3>& landmarks, int m_time,
                                double t_lo, double t_hi) {
  if (landmarks.empty()) throw ConfigError("no landmarks");
  for (const Vec3& p : landmarks) {
    if (!p.allFinite()) throw ConfigError("non-finite landmark");
  }
  if (m_time < 1) throw ConfigError("invalid time sample count");
  if (!std::isfinite(t_lo) || !std::isfinite(t_hi) || t_lo > t_hi) {
    throw ConfigError("invalid time range");
  }
  InducingInit init;
  init.landmark_positions = landmarks;
  init.time_samples.reserve(m_time);
  if (m_time == 1) {
    init.time_samples.push_back(0.5 * (t_lo + t_hi));
  } else {
    for (int j = 0; j < m_time; ++j) {
      init.time_samples.push_back(t_lo + (t_hi - t_lo) * j / (m_time - 1));
    }
  }
  init.points.reserve(landmarks.size() * init.time_samples.size());
  for (const Vec3& p : landmarks) {
    for (const double t : init.time_samples) {
      init.points.emplace_back(p[0], p[1], p[2], t);
    }
  }
  return init;
}

InducingInit baseline_init(const std::vector<MatX>& trajectories,
                           const std::vector<double>& times,
                           const std::vector<Vec3>& canonical_positions,
                           int m_spatial, int m_time, BaselineInitKind kind,
                           std::uint64_t seed) {
  validate_trajectories(trajectories);
  const int n = static_cast<int>(trajectories.size());
  const int frames = static_cast<int>(trajectories.front().rows());
  if (static_cast<int>(times.size()) != frames) {
    throw ConfigError("time stamp count mismatch");
  }
  for (const double t : times) {
    if (!std::isfinite(t)) throw ConfigError("non-finite time stamp");
  }
  if (m_spatial < 1 || m_time < 1) throw ConfigError("invalid inducing count");

  if (kind == BaselineInitKind::Random) {
    const long long want = static_cast<long long>(m_spatial) * m_time;
    const long long pool = static_cast<long long>(n) * frames;
    if (want > pool) throw ConfigError("not enough observations");
    // Partial Fisher-Yates over flat (primitive, frame) indices gives
    // distinct pairs with a bounded number of draws.
    std::vector<long long> flat(pool);
    std::iota(flat.begin(), flat.end(), 0ll);
    Rng rng(substream_seed(seed, "random-init"));
    InducingInit init;
    init.points.reserve(want);
    for (long long i = 0; i < want; ++i) {
      const long long j =
          i + static_cast<long long>(rng.uniform_int(pool - i));
      std::swap(flat[i], flat[j]);
      const int k = static_cast<int>(flat[i] / frames);
      const int s = static_cast<int>(flat[i] % frames);
      init.points.emplace_back(trajectories[k](s, 0), trajectories[k](s, 1),
                               trajectories[k](s, 2), times[s]);
    }
    return init;
  }

  if (static_cast<int>(canonical_positions.size()) != n) {
    throw ConfigError("canonical position count mismatch");
  }
  if (m_spatial > n) throw ConfigError("too many landmarks");
  MatX speeds(n, 3);
  for (int k = 0; k < n; ++k) {
    for (int axis = 0; axis < 3; ++axis) {
      double step = 0.0;
      for (int s = 0; s + 1 < frames; ++s) {
        step += std::abs(trajectories[k](s + 1, axis) -
                         trajectories[k](s, axis));
      }
      speeds(k, axis) = step / (frames - 1);
    }
  }
  const std::vector<int> reps = cluster_representatives(speeds, m_spatial, seed);
  std::vector<Vec3> landmarks;
  landmarks.reserve(reps.size());
  for (const int idx : reps) landmarks.push_back(canonical_positions[idx]);
  const auto [lo, hi] = std::minmax_element(times.begin(), times.end());
  return build_inducing_set(landmarks, m_time, *lo, *hi);
}

}  // namespace gpmotion
