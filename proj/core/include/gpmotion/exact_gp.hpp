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

#include <Eigen/Cholesky>
#include <vector>

#include "gpmotion/kernels.hpp"
#include "gpmotion/types.hpp"

namespace gpmotion {

// Dense single-output GP with exact conditioning. Serves as the reference
// implementation the sparse variational model is validated against, and as
// the workhorse for small 1D fits.
//
// Raw parameter vector layout: [kernel (19), mean (4), noise variance (1)].
inline constexpr int kExactGpParamCount = kKernelParamCount + kMeanParamCount + 1;

class ExactGP {
 public:
  ExactGP(const CompositeKernelParams& kernel, const MeanFunctionParams& mean,
          double noise_variance);

  // Conditions on (X, y). Accepts an empty set, in which case the posterior
  // is the prior. Throws on size mismatch or non-finite targets.
  void condition(std::vector<Vec4> X, VecX y);

  double posterior_mean(const Vec4& x) const;
  double posterior_variance(const Vec4& x) const;

  // log p(y | X, theta); requires conditioning on at least one point.
  double log_marginal_likelihood() const;
  // Gradient of the log marginal likelihood w.r.t. the raw parameter vector.
  VecX log_marginal_gradient_raw() const;

  VecX raw_parameters() const;
  void set_raw_parameters(const VecX& raw);  // re-conditions stored data

  const CompositeKernelParams& kernel_params() const { return kernel_; }
  const MeanFunctionParams& mean_params() const { return mean_; }
  double noise_variance() const;

  static constexpr int kNoiseSlot = kKernelParamCount + kMeanParamCount;

 private:
  void refactorize();

  CompositeKernelParams kernel_;
  MeanFunctionParams mean_;
  double noise_raw_;

  std::vector<Vec4> X_;
  VecX y_;
  Eigen::LLT<MatX> llt_;
  VecX alpha_;  // (K + sigma_n^2 I)^{-1} (y - m(X))
  bool conditioned_ = false;
};

}  // namespace gpmotion
