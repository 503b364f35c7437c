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

#include "gpmotion/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "gpmotion/errors.hpp"
#include "gpmotion/exact_gp.hpp"
#include "gpmotion/math_util.hpp"

namespace gpmotion {

double mean_squared_error(const MatX& prediction, const MatX& reference) {
  if (prediction.rows() != reference.rows() ||
      prediction.cols() != reference.cols()) {
    throw ConfigError("shape mismatch");
  }
  if (prediction.size() == 0) throw ConfigError("empty comparison");
  return (prediction - reference).squaredNorm() /
         static_cast<double>(prediction.size());
}

double psnr(const MatX& prediction, const MatX& reference, double peak) {
  if (!(peak > 0.0) || !std::isfinite(peak)) {
    throw ConfigError("peak must be positive");
  }
  const double mse = mean_squared_error(prediction, reference);
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(peak * peak / mse);
}

double trajectory_bbox_diagonal(const std::vector<MatX>& trajectories) {
  if (trajectories.empty()) throw ConfigError("no trajectories");
  Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
  Vec3 hi = -lo;
  for (const MatX& traj : trajectories) {
    if (traj.cols() != 3 || traj.rows() < 1) {
      throw ConfigError("trajectories must be frames x 3");
    }
    lo = lo.cwiseMin(traj.colwise().minCoeff().transpose());
    hi = hi.cwiseMax(traj.colwise().maxCoeff().transpose());
  }
  return (hi - lo).norm();
}

MatX linear_extrapolation(const MatX& prefix, int horizon) {
  if (prefix.rows() < 2) throw ConfigError("need at least two frames");
  if (horizon < 0) throw ConfigError("horizon must be non-negative");
  const auto last = prefix.row(prefix.rows() - 1);
  const auto step = last - prefix.row(prefix.rows() - 2);
  MatX out(horizon, prefix.cols());
  for (int h = 0; h < horizon; ++h) {
    out.row(h) = last + (h + 1) * step;
  }
  return out;
}

MatX gp_extrapolation(const SparseGP& gp, const std::vector<Vec3>& positions,
                      const std::vector<double>& times, MatX* variances) {
  if (positions.empty()) throw ConfigError("no query positions");
  if (times.empty()) throw ConfigError("no query times");
  const int n = static_cast<int>(positions.size());
  const int h = static_cast<int>(times.size());
  MatX means(n * h, kOutputDims);
  if (variances != nullptr) variances->resize(n * h, kOutputDims);
  for (int k = 0; k < n; ++k) {
    for (int f = 0; f < h; ++f) {
      Vec4 x;
      x << positions[k], times[f];
      const Prediction pred = gp.predict(x);
      means.row(k * h + f) = pred.mean.transpose();
      if (variances != nullptr) {
        variances->row(k * h + f) = pred.variance.transpose();
      }
    }
  }
  return means;
}

SparsificationCurve sparsification_curve(const VecX& errors,
                                         const VecX& uncertainties) {
  const int n = static_cast<int>(errors.size());
  if (n == 0) throw ConfigError("empty sparsification input");
  if (uncertainties.size() != errors.size()) {
    throw ConfigError("errors and uncertainties differ in length");
  }
  if ((errors.array() < 0.0).any() || !errors.allFinite()) {
    throw ConfigError("errors must be finite and non-negative");
  }
  if ((uncertainties.array() < 0.0).any() || !uncertainties.allFinite()) {
    throw ConfigError("uncertainties must be finite and non-negative");
  }

  const auto retained_means = [&](const VecX& key) {
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return key[a] > key[b]; });
    // suffix[r] = sum of errors still retained after removing r entries.
    std::vector<double> suffix(n + 1, 0.0);
    for (int i = n - 1; i >= 0; --i) {
      suffix[i] = suffix[i + 1] + errors[order[i]];
    }
    VecX means(101);
    for (int i = 0; i <= 100; ++i) {
      const int removed =
          static_cast<int>(std::llround(i * static_cast<double>(n) / 100.0));
      means[i] = removed >= n ? 0.0 : suffix[removed] / (n - removed);
    }
    return means;
  };

  SparsificationCurve curve;
  curve.fractions = VecX::LinSpaced(101, 0.0, 1.0);
  curve.oracle = retained_means(errors);
  curve.predicted = retained_means(uncertainties);
  curve.uninformative_ordering =
      uncertainties.maxCoeff() == uncertainties.minCoeff();

  const double base = curve.oracle[0];
  if (base > 0.0) {
    curve.oracle /= base;
    curve.predicted /= base;
  } else {
    curve.oracle.setZero();
    curve.predicted.setZero();
  }
  double area = 0.0;
  for (int i = 1; i <= 100; ++i) {
    const double prev = curve.predicted[i - 1] - curve.oracle[i - 1];
    const double next = curve.predicted[i] - curve.oracle[i];
    area += 0.5 * 0.01 * (prev + next);
  }
  curve.ause = area;
  return curve;
}

double ause(const VecX& errors, const VecX& uncertainties) {
  return sparsification_curve(errors, uncertainties).ause;
}

namespace {

// Shared starting point for both step-fit kernels; only the slots in the
// mask are ever optimized, so the product terms stay switched off.
CompositeKernelParams step_kernel(KernelVariant variant, MaternNu nu) {
  CompositeKernelParams kp;
  kp.variant = variant;
  kp.spatial_nu = nu;
  kp.temporal_nu = nu;
  kp.spatial.variance_raw = inv_softplus(1.0);
  kp.spatial.lengthscale_raw = {inv_softplus(0.3), inv_softplus(0.3),
                                inv_softplus(0.3)};
  for (auto& axis : kp.axis) {
    axis.matern.variance_raw = -40.0;
    axis.matern.lengthscale_raw = inv_softplus(0.3);
    axis.periodic.variance_raw = -40.0;
    axis.periodic.lengthscale_raw = inv_softplus(0.3);
    axis.periodic.period_raw = inv_softplus(1.0);
  }
  return kp;
}

double masked_adam_fit(ExactGP& gp, const std::vector<Vec4>& X, const VecX& y,
                       const std::vector<int>& mask, int iterations,
                       double learning_rate) {
  VecX raw = gp.raw_parameters();
  VecX m = VecX::Zero(raw.size());
  VecX v = VecX::Zero(raw.size());
  constexpr double kBeta1 = 0.9;
  constexpr double kBeta2 = 0.999;
  constexpr double kEps = 1e-8;
  for (int it = 1; it <= iterations; ++it) {
    const VecX grad = gp.log_marginal_gradient_raw();
    for (int slot : mask) {
      m[slot] = kBeta1 * m[slot] + (1.0 - kBeta1) * grad[slot];
      v[slot] = kBeta2 * v[slot] + (1.0 - kBeta2) * grad[slot] * grad[slot];
      const double m_hat = m[slot] / (1.0 - std::pow(kBeta1, it));
      const double v_hat = v[slot] / (1.0 - std::pow(kBeta2, it));
      raw[slot] += learning_rate * m_hat / (std::sqrt(v_hat) + kEps);
    }
    gp.set_raw_parameters(raw);
  }
  double sq = 0.0;
  for (std::size_t i = 0; i < X.size(); ++i) {
    const double r = gp.posterior_mean(X[i]) - y[static_cast<Eigen::Index>(i)];
    sq += r * r;
  }
  return std::sqrt(sq / static_cast<double>(X.size()));
}

}  // namespace

StepFitResult step_fit_compare(const VecX& x, const VecX& y, int iterations,
                               double learning_rate) {
  if (x.size() != y.size()) throw ConfigError("x and y differ in length");
  if (x.size() < 4) throw ConfigError("need at least four samples");
  if (!x.allFinite() || !y.allFinite()) {
    throw ConfigError("samples must be finite");
  }
  std::vector<Vec4> X;
  X.reserve(static_cast<std::size_t>(x.size()));
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    X.push_back(Vec4(x[i], 0.0, 0.0, 0.0));
  }
  // Signal variance, x lengthscale, constant mean, noise variance.
  const std::vector<int> mask = {0, 1, kKernelParamCount,
                                 ExactGP::kNoiseSlot};
  const MeanFunctionParams mean = MeanFunctionParams::constant(y.mean());

  const auto run = [&](KernelVariant variant, MaternNu nu) {
    ExactGP gp(step_kernel(variant, nu), mean, 1e-2);
    gp.condition(X, y);
    return masked_adam_fit(gp, X, y, mask, iterations, learning_rate);
  };

  StepFitResult result;
  result.rmse_rbf = run(KernelVariant::RbfSpatial, MaternNu::ThreeHalves);
  result.rmse_matern = run(KernelVariant::JointMatern, MaternNu::Half);
  return result;
}

}  // namespace gpmotion
