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

#include <vector>

#include "gpmotion/svgp.hpp"
#include "gpmotion/types.hpp"

namespace gpmotion {

double mean_squared_error(const MatX& prediction, const MatX& reference);

// 10 log10(peak^2 / MSE) in dB; identical inputs give +infinity.
double psnr(const MatX& prediction, const MatX& reference, double peak);

// Diagonal of the axis-aligned bounding box over every row of every
// trajectory; the PSNR peak for trajectory-space comparisons.
double trajectory_bbox_diagonal(const std::vector<MatX>& trajectories);

// Constant-velocity continuation from the last two rows of the prefix:
// row h is prefix.bottom + (h + 1) * (last step). Needs at least two rows.
MatX linear_extrapolation(const MatX& prefix, int horizon);

// Predictive means at (canonical position, query time) for each primitive and
// time, primitive-major: row k * times.size() + h. The model is queried as-is;
// extrapolation happens by passing times beyond the training range. Optional
// out-parameter receives the matching predictive variances.
MatX gp_extrapolation(const SparseGP& gp, const std::vector<Vec3>& positions,
                      const std::vector<double>& times,
                      MatX* variances = nullptr);

// Error of the retained set as progressively larger fractions of the units
// are removed, once ordered by true error (oracle) and once by predicted
// uncertainty. Both curves are normalized by the full-set error; ties are
// broken by index.
struct SparsificationCurve {
  VecX fractions;  // 0, 0.01, ..., 1
  VecX oracle;
  VecX predicted;
  // All uncertainty values equal: the predicted ordering carries no
  // information, but the curve stays defined through index order.
  bool uninformative_ordering = false;
  double ause = 0.0;  // Trapezoidal area between the curves.
};

SparsificationCurve sparsification_curve(const VecX& errors,
                                         const VecX& uncertainties);
double ause(const VecX& errors, const VecX& uncertainties);

// Exact-GP train RMSE on 1D data under a squared-exponential and an
// exponential (Matern nu = 1/2) kernel, hyperparameters optimized with
// identical budgets: same optimizer, step count, learning rate, and initial
// values for the shared slots (signal variance, lengthscale, noise, constant
// mean).
struct StepFitResult {
  double rmse_rbf = 0.0;
  double rmse_matern = 0.0;
};

StepFitResult step_fit_compare(const VecX& x, const VecX& y,
                               int iterations = 300,
                               double learning_rate = 0.05);

}  // namespace gpmotion
